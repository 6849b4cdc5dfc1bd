use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iri::Iri;

/// A numeric attribute value that remembers its lexical form.
///
/// Equality is on the lexical form, so `12` and `12.0` are different values
/// for graph identity. Numeric comparisons go through [`Number::value`].
#[derive(Debug, Clone)]
pub struct Number {
    text: String,
    value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not a numeric literal")]
pub struct NumberError(pub String);

impl Number {
    /// Parses an integer, decimal or double literal (`12`, `-0.5`, `1.2e3`).
    pub fn parse(text: &str) -> Result<Self, NumberError> {
        if !is_numeric_lexical(text) {
            return Err(NumberError(text.to_string()));
        }
        let value = f64::from_str(text).map_err(|_| NumberError(text.to_string()))?;
        if !value.is_finite() {
            return Err(NumberError(text.to_string()));
        }
        Ok(Number { text: text.to_string(), value })
    }

    pub fn from_f64(value: f64) -> Result<Self, NumberError> {
        if !value.is_finite() {
            return Err(NumberError(value.to_string()));
        }
        // f64's Display never uses exponent notation, so this is always a decimal lexical.
        let text = if value == 0.0 { "0".to_string() } else { value.to_string() };
        Ok(Number { text, value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn lexical(&self) -> &str {
        &self.text
    }

    /// The value as a non-negative integer, if it is one.
    pub fn as_u64(&self) -> Option<u64> {
        (self.value >= 0.0 && self.value.fract() == 0.0 && self.value <= u64::MAX as f64).then_some(self.value as u64)
    }
}

impl From<i64> for Number {
    fn from(v: i64) -> Self {
        Number { text: v.to_string(), value: v as f64 }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Eq for Number {}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// `[+-]? digits ('.' digits)? ([eE] [+-]? digits)?`, also `.5`-style decimals.
fn is_numeric_lexical(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let int_digits = i - int_start;
    let mut frac_digits = 0;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let s = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        frac_digits = i - s;
        if frac_digits == 0 {
            return false;
        }
    }
    if int_digits == 0 && frac_digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let s = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == s {
            return false;
        }
    }
    i == b.len()
}

/// Attribute payload of a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrValue {
    Number(Number),
    Text(String),
    Bool(bool),
    /// Non-empty set of texts.
    Set(BTreeSet<String>),
    /// Reference to another IRI (capability kinds, opaque annotations).
    Ref(Iri),
}

impl AttrValue {
    pub fn number(v: f64) -> Self {
        AttrValue::Number(Number::from_f64(v).expect("finite number"))
    }

    pub fn int(v: i64) -> Self {
        AttrValue::Number(Number::from(v))
    }

    pub fn text(v: impl Into<String>) -> Self {
        AttrValue::Text(v.into())
    }

    pub fn set<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AttrValue::Set(items.into_iter().map(Into::into).collect())
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self {
            AttrValue::Number(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_ref_iri(&self) -> Option<&Iri> {
        match self {
            AttrValue::Ref(i) => Some(i),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            AttrValue::Number(_) => "number",
            AttrValue::Text(_) => "text",
            AttrValue::Bool(_) => "boolean",
            AttrValue::Set(_) => "set",
            AttrValue::Ref(_) => "iri",
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Number(n) => write!(f, "{n}"),
            AttrValue::Text(t) => write!(f, "{t:?}"),
            AttrValue::Bool(b) => write!(f, "{b}"),
            AttrValue::Set(s) => {
                f.write_str("{")?;
                for (i, m) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{m:?}")?;
                }
                f.write_str("}")
            }
            AttrValue::Ref(i) => write!(f, "<{i}>"),
        }
    }
}

// JSON form: numbers as JSON numbers, text as strings, booleans as booleans,
// sets as string arrays, references as `{"iri": "..."}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AttrJson {
    Bool(bool),
    Number(serde_json::Number),
    Text(String),
    Set(Vec<String>),
    Ref { iri: Iri },
}

impl Serialize for AttrValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            AttrValue::Number(n) => {
                let json = n
                    .lexical()
                    .parse::<i64>()
                    .ok()
                    .map(serde_json::Number::from)
                    .or_else(|| serde_json::Number::from_f64(n.value()))
                    .expect("finite");
                json.serialize(serializer)
            }
            AttrValue::Text(t) => serializer.serialize_str(t),
            AttrValue::Bool(b) => serializer.serialize_bool(*b),
            AttrValue::Set(s) => s.serialize(serializer),
            AttrValue::Ref(i) => AttrJson::Ref { iri: i.clone() }.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for AttrValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        Ok(match AttrJson::deserialize(deserializer)? {
            AttrJson::Bool(b) => AttrValue::Bool(b),
            AttrJson::Number(n) => AttrValue::Number(Number::parse(&n.to_string()).map_err(D::Error::custom)?),
            AttrJson::Text(t) => AttrValue::Text(t),
            AttrJson::Set(s) => AttrValue::Set(s.into_iter().collect()),
            AttrJson::Ref { iri } => AttrValue::Ref(iri),
        })
    }
}
