use std::fmt::Write;

use crate::attr::AttrValue;
use crate::graph::{AkgGraph, Direction, EdgeKind};
use crate::iri::{is_plain_local, PrefixTable};

/// Canonical Turtle for a graph.
///
/// Prefixes are sorted by name, subjects by expanded IRI; within a subject
/// the order is `a`, `rdfs:label`, edges in [`EdgeKind::ALL`] order (objects
/// sorted), then attributes sorted by name.
pub fn serialize_turtle(graph: &AkgGraph) -> String {
    let prefixes = graph.prefixes();
    let mut out = String::new();
    for (p, base) in prefixes.iter() {
        let _ = writeln!(out, "@prefix {p}: <{base}> .");
    }
    for (iri, node) in graph.nodes() {
        out.push('\n');
        let _ = write!(out, "{} a ppr:{}", term(prefixes, iri.as_str()), node.kind.name());
        if !node.label.is_empty() {
            let _ = write!(out, " ;\n    rdfs:label {}", quote(&node.label));
        }
        for kind in EdgeKind::ALL {
            let objects: Vec<String> = graph
                .adjacent(iri, kind, Direction::Out)
                .map(|o| term(prefixes, o.as_str()))
                .collect();
            if !objects.is_empty() {
                let _ = write!(out, " ;\n    ppr:{} {}", kind.name(), objects.join(", "));
            }
        }
        for (name, value) in &node.attrs {
            let pred = if is_plain_local(name) {
                format!("attr:{name}")
            } else {
                term(prefixes, name)
            };
            let _ = write!(out, " ;\n    {pred} {}", value_term(prefixes, value));
        }
        out.push_str(" .\n");
    }
    out
}

fn term(prefixes: &PrefixTable, iri: &str) -> String {
    prefixes.compact(iri).unwrap_or_else(|| format!("<{iri}>"))
}

fn value_term(prefixes: &PrefixTable, value: &AttrValue) -> String {
    match value {
        AttrValue::Number(n) => n.lexical().to_string(),
        AttrValue::Text(t) => quote(t),
        AttrValue::Bool(b) => b.to_string(),
        AttrValue::Set(members) => members
            .iter()
            .map(|m| format!("{}^^ppr:member", quote(m)))
            .collect::<Vec<_>>()
            .join(", "),
        AttrValue::Ref(i) => term(prefixes, i.as_str()),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
