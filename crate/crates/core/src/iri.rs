//! Identifiers and prefix tables.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab;

/// An expanded, absolute IRI identifying one node of the graph.
///
/// Prefixed names are expanded before an `Iri` is built, so two `Iri`s are
/// equal exactly when their expanded text is equal. Ordering is byte-wise
/// lexicographic on the expanded text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Iri(String);

impl Iri {
    /// Wraps an already expanded IRI. Fails on empty or whitespace-bearing input.
    pub fn new(value: impl Into<String>) -> Result<Self, IriError> {
        let value = value.into();
        if value.is_empty() {
            return Err(IriError::Empty);
        }
        if value.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')) {
            return Err(IriError::IllegalCharacter(value));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`, or the whole IRI if neither occurs.
    pub fn local_name(&self) -> &str {
        let s = self.0.as_str();
        match s.rfind(['#', '/']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IriError {
    #[error("IRI must not be empty")]
    Empty,
    #[error("IRI contains an illegal character: {0:?}")]
    IllegalCharacter(String),
    #[error("undeclared prefix `{0}`")]
    UndeclaredPrefix(String),
    #[error("prefix `{prefix}` is reserved for <{base}>")]
    ReservedPrefix { prefix: String, base: String },
}

/// Maps prefix labels (without the trailing colon) to IRI bases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrefixTable(BTreeMap<String, String>);

impl Default for PrefixTable {
    fn default() -> Self {
        Self::standard()
    }
}

impl PrefixTable {
    /// The fixed prefixes every graph carries: `ppr`, `attr`, `rdf`, `rdfs`, `xsd`.
    pub fn standard() -> Self {
        let map = vocab::STANDARD_PREFIXES
            .iter()
            .map(|(p, b)| (p.to_string(), b.to_string()))
            .collect();
        PrefixTable(map)
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.0.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(p, b)| (p.as_str(), b.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Declares a prefix. Standard prefixes can only be re-declared with their own base.
    pub fn insert(&mut self, prefix: &str, base: &str) -> Result<(), IriError> {
        if let Some((_, std_base)) = vocab::STANDARD_PREFIXES.iter().find(|(p, _)| *p == prefix) {
            if *std_base != base {
                return Err(IriError::ReservedPrefix {
                    prefix: prefix.to_string(),
                    base: std_base.to_string(),
                });
            }
        }
        self.0.insert(prefix.to_string(), base.to_string());
        Ok(())
    }

    /// Expands `prefix:local` against the table.
    pub fn expand(&self, prefix: &str, local: &str) -> Result<Iri, IriError> {
        let base = self
            .get(prefix)
            .ok_or_else(|| IriError::UndeclaredPrefix(prefix.to_string()))?;
        Iri::new(format!("{base}{local}"))
    }

    /// Resolves user input: `<absolute>`, `scheme://...`, `urn:...`, or a prefixed name.
    pub fn resolve(&self, input: &str) -> Result<Iri, IriError> {
        let input = input.trim();
        if let Some(inner) = input.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
            return Iri::new(inner);
        }
        if input.contains("://") || input.starts_with("urn:") {
            return Iri::new(input);
        }
        match input.split_once(':') {
            Some((prefix, local)) => self.expand(prefix, local),
            None => Err(IriError::UndeclaredPrefix(String::new())),
        }
    }

    /// Shortest prefixed form of `iri` whose local part is a plain name, if any.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.0
            .iter()
            .filter(|(_, base)| !base.is_empty() && iri.starts_with(base.as_str()))
            .map(|(p, base)| (p, &iri[base.len()..]))
            .filter(|(_, local)| is_plain_local(local))
            .min_by_key(|(p, local)| (local.len(), p.len(), p.to_string()))
            .map(|(p, local)| format!("{p}:{local}"))
    }
}

/// `[A-Za-z_][A-Za-z0-9_-]*`: the local-name form the serializer emits.
pub fn is_plain_local(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_forms() {
        let mut t = PrefixTable::standard();
        t.insert("ex", "http://ex.org/").unwrap();
        assert_eq!(t.resolve("ex:Cell1").unwrap().as_str(), "http://ex.org/Cell1");
        assert_eq!(t.resolve("<http://a/b>").unwrap().as_str(), "http://a/b");
        assert_eq!(t.resolve("http://a/b").unwrap().as_str(), "http://a/b");
        assert!(matches!(t.resolve("ey:X"), Err(IriError::UndeclaredPrefix(p)) if p == "ey"));
    }

    #[test]
    fn reserved_prefix_rebinding_rejected() {
        let mut t = PrefixTable::standard();
        assert!(t.insert("ppr", "http://elsewhere/").is_err());
        assert!(t.insert("ppr", vocab::PPR_NS).is_ok());
    }

    #[test]
    fn compact_prefers_plain_locals() {
        let mut t = PrefixTable::standard();
        t.insert("ex", "http://ex.org/").unwrap();
        assert_eq!(t.compact("http://ex.org/R1").as_deref(), Some("ex:R1"));
        assert_eq!(t.compact("http://ex.org/R1/run1"), None);
        assert_eq!(t.compact("http://other/x"), None);
    }

    #[test]
    fn local_name() {
        assert_eq!(Iri::new("http://ex.org/a#B").unwrap().local_name(), "B");
        assert_eq!(Iri::new("http://ex.org/x/Y").unwrap().local_name(), "Y");
        assert_eq!(Iri::new("urn:z").unwrap().local_name(), "urn:z");
    }
}
