//! Turtle subset used as the on-disk exchange format.
//!
//! Supported: `@prefix`/`PREFIX` directives, `a`, predicate lists (`;`),
//! object lists (`,`), IRI references, prefixed names, and plain, typed,
//! language-tagged, numeric and boolean literals. Blank nodes, collections
//! and `@base` are rejected.
//!
//! Statements map onto the graph as follows: `a ppr:<Kind>` assigns the node
//! kind, `rdfs:label` sets the label, `ppr:<edge>` predicates become edges,
//! and every other predicate is kept as a node attribute (`attr:<name>` under
//! its local name, anything else under its full IRI). Nodes that are only
//! referenced as edge objects get their kind inferred from the typing table
//! when it is unambiguous.

mod lexer;
mod mapping;
mod parser;
mod writer;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{AkgGraph, Edge, GraphError, Node};
use crate::iri::{Iri, PrefixTable};

pub use writer::serialize_turtle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

/// A located parse or mapping error. Lines and columns are 1-based; columns count characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl ParseError {
    pub(crate) fn at(src: &str, pos: Pos, message: impl Into<String>) -> Self {
        let snippet: String = src
            .lines()
            .nth(pos.line.saturating_sub(1))
            .unwrap_or("")
            .chars()
            .take(120)
            .collect();
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            snippet,
        }
    }

    pub fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept `hasSuccessor` cycles (for documents that are only validated).
    pub allow_successor_cycles: bool,
}

/// Nodes, edges and prefixes read from one document.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDelta {
    pub prefixes: PrefixTable,
    pub nodes: BTreeMap<Iri, Node>,
    pub edges: Vec<Edge>,
}

impl GraphDelta {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    /// Applies the delta to `graph`. Existing nodes are a `DuplicateIri` error.
    pub fn apply_to(&self, graph: &mut AkgGraph) -> Result<(), GraphError> {
        for (prefix, base) in self.prefixes.iter() {
            if graph.prefixes().get(prefix) != Some(base) {
                // standard prefixes are identical by construction
                let _ = graph.prefixes_mut().insert(prefix, base);
            }
        }
        for (iri, node) in &self.nodes {
            graph.add_node(iri.clone(), node.kind, node.label.clone(), node.attrs.clone())?;
        }
        for e in &self.edges {
            graph.add_edge(&e.subject, e.kind, &e.object)?;
        }
        Ok(())
    }

    /// Builds a fresh graph from the delta.
    pub fn into_graph(self, options: ParseOptions) -> AkgGraph {
        let mut g = if options.allow_successor_cycles {
            AkgGraph::new_lenient()
        } else {
            AkgGraph::new()
        };
        self.apply_to(&mut g).expect("delta was checked against an empty graph");
        g
    }
}

/// Parses a document with default options.
pub fn parse_turtle(text: &str) -> Result<GraphDelta, Vec<ParseError>> {
    parse_turtle_with(text, ParseOptions::default())
}

pub fn parse_turtle_with(text: &str, options: ParseOptions) -> Result<GraphDelta, Vec<ParseError>> {
    mapping::parse(text, options).map(|(delta, _)| delta)
}

/// Parses a document straight into a graph.
pub fn load_turtle(text: &str) -> Result<AkgGraph, Vec<ParseError>> {
    load_turtle_with(text, ParseOptions::default())
}

pub fn load_turtle_with(text: &str, options: ParseOptions) -> Result<AkgGraph, Vec<ParseError>> {
    mapping::parse(text, options).map(|(_, graph)| graph)
}
