//! The typed asset knowledge graph.
//!
//! Nodes are keyed by expanded [`Iri`] and carry exactly one [`NodeKind`].
//! Edges are `(subject, EdgeKind, object)` triples with set semantics. Every
//! stored edge satisfies the typing table in [`EdgeKind::permits`], and the
//! `hasSuccessor` relation over process classes is kept acyclic (unless the
//! graph was opened in lenient mode for validation of untrusted input).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attr::AttrValue;
use crate::constraint::{Constraint, ConstraintError};
use crate::iri::{is_plain_local, Iri, PrefixTable};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    ProductClass,
    ProcessClass,
    RequiredCapability,
    ProvidedCapability,
    Resource,
    UndesiredCondition,
    PlausibleCause,
    ProductInstance,
    ProcessStepInstance,
}

/// Whether a kind describes templates, concrete individuals, or conditions/causes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Class,
    Instance,
    Condition,
}

impl NodeKind {
    pub const ALL: [NodeKind; 9] = [
        NodeKind::ProductClass,
        NodeKind::ProcessClass,
        NodeKind::RequiredCapability,
        NodeKind::ProvidedCapability,
        NodeKind::Resource,
        NodeKind::UndesiredCondition,
        NodeKind::PlausibleCause,
        NodeKind::ProductInstance,
        NodeKind::ProcessStepInstance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::ProductClass => "ProductClass",
            NodeKind::ProcessClass => "ProcessClass",
            NodeKind::RequiredCapability => "RequiredCapability",
            NodeKind::ProvidedCapability => "ProvidedCapability",
            NodeKind::Resource => "Resource",
            NodeKind::UndesiredCondition => "UndesiredCondition",
            NodeKind::PlausibleCause => "PlausibleCause",
            NodeKind::ProductInstance => "ProductInstance",
            NodeKind::ProcessStepInstance => "ProcessStepInstance",
        }
    }

    pub fn class_iri(self) -> String {
        format!("{}{}", vocab::PPR_NS, self.name())
    }

    pub fn from_class_iri(iri: &str) -> Option<Self> {
        let local = iri.strip_prefix(vocab::PPR_NS)?;
        NodeKind::from_str(local).ok()
    }

    pub fn level(self) -> Level {
        match self {
            NodeKind::ProductClass | NodeKind::ProcessClass | NodeKind::RequiredCapability => Level::Class,
            NodeKind::ProvidedCapability
            | NodeKind::Resource
            | NodeKind::ProductInstance
            | NodeKind::ProcessStepInstance => Level::Instance,
            NodeKind::UndesiredCondition | NodeKind::PlausibleCause => Level::Condition,
        }
    }

    /// Instances of a class: these must carry exactly one `instanceOf` edge.
    pub fn is_class_instance(self) -> bool {
        matches!(self, NodeKind::ProductInstance | NodeKind::ProcessStepInstance)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NodeKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        NodeKind::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

/// Relation vocabulary. Declaration order is the fixed predicate order used by the serializer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeKind {
    HasInput,
    HasOutput,
    HasSuccessor,
    RequiresCapability,
    ProvidesCapability,
    HasUndesiredCondition,
    HasPlausibleCause,
    DefinesCause,
    Affects,
    InstanceOf,
    AllocatedTo,
}

use NodeKind as K;

const AFFECTABLE: &[NodeKind] = &[K::ProcessClass, K::ProductClass, K::Resource, K::RequiredCapability];

impl EdgeKind {
    pub const ALL: [EdgeKind; 11] = [
        EdgeKind::HasInput,
        EdgeKind::HasOutput,
        EdgeKind::HasSuccessor,
        EdgeKind::RequiresCapability,
        EdgeKind::ProvidesCapability,
        EdgeKind::HasUndesiredCondition,
        EdgeKind::HasPlausibleCause,
        EdgeKind::DefinesCause,
        EdgeKind::Affects,
        EdgeKind::InstanceOf,
        EdgeKind::AllocatedTo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::HasInput => "hasInput",
            EdgeKind::HasOutput => "hasOutput",
            EdgeKind::HasSuccessor => "hasSuccessor",
            EdgeKind::RequiresCapability => "requiresCapability",
            EdgeKind::ProvidesCapability => "providesCapability",
            EdgeKind::HasUndesiredCondition => "hasUndesiredCondition",
            EdgeKind::HasPlausibleCause => "hasPlausibleCause",
            EdgeKind::DefinesCause => "definesCause",
            EdgeKind::Affects => "affects",
            EdgeKind::InstanceOf => "instanceOf",
            EdgeKind::AllocatedTo => "allocatedTo",
        }
    }

    pub fn predicate_iri(self) -> String {
        format!("{}{}", vocab::PPR_NS, self.name())
    }

    pub fn from_predicate_iri(iri: &str) -> Option<Self> {
        let local = iri.strip_prefix(vocab::PPR_NS)?;
        EdgeKind::from_str(local).ok()
    }

    /// Permitted `(subject kind, object kind)` pairs.
    pub fn signatures(self) -> &'static [(NodeKind, &'static [NodeKind])] {
        match self {
            EdgeKind::HasInput | EdgeKind::HasOutput => &[
                (K::ProcessClass, &[K::ProductClass]),
                (K::ProcessStepInstance, &[K::ProductInstance]),
            ],
            EdgeKind::HasSuccessor => &[(K::ProcessClass, &[K::ProcessClass])],
            EdgeKind::RequiresCapability => &[(K::ProcessClass, &[K::RequiredCapability])],
            EdgeKind::ProvidesCapability => &[(K::Resource, &[K::ProvidedCapability])],
            EdgeKind::HasUndesiredCondition => &[
                (K::ProcessClass, &[K::UndesiredCondition]),
                (K::ProductClass, &[K::UndesiredCondition]),
                (K::Resource, &[K::UndesiredCondition]),
                (K::RequiredCapability, &[K::UndesiredCondition]),
            ],
            EdgeKind::HasPlausibleCause => &[(K::UndesiredCondition, &[K::PlausibleCause])],
            EdgeKind::DefinesCause => &[(K::Resource, &[K::PlausibleCause])],
            EdgeKind::Affects => &[(K::UndesiredCondition, AFFECTABLE)],
            EdgeKind::InstanceOf => &[
                (K::ProcessStepInstance, &[K::ProcessClass]),
                (K::ProductInstance, &[K::ProductClass]),
            ],
            // Class-level allocation is structurally storable so the validator can flag it.
            EdgeKind::AllocatedTo => &[
                (K::ProcessStepInstance, &[K::Resource]),
                (K::ProcessClass, &[K::Resource]),
            ],
        }
    }

    pub fn permits(self, subject: NodeKind, object: NodeKind) -> bool {
        self.signatures()
            .iter()
            .any(|(s, objs)| *s == subject && objs.contains(&object))
    }

    pub fn domain(self) -> BTreeSet<NodeKind> {
        self.signatures().iter().map(|(s, _)| *s).collect()
    }

    pub fn range(self) -> BTreeSet<NodeKind> {
        self.signatures().iter().flat_map(|(_, o)| o.iter().copied()).collect()
    }

    /// Object kinds permitted once the subject kind is known.
    pub fn range_for(self, subject: NodeKind) -> BTreeSet<NodeKind> {
        self.signatures()
            .iter()
            .filter(|(s, _)| *s == subject)
            .flat_map(|(_, o)| o.iter().copied())
            .collect()
    }

    /// Edges whose presence can change eligibility, durations or precedence.
    fn affects_planning(self) -> bool {
        matches!(
            self,
            EdgeKind::HasSuccessor | EdgeKind::RequiresCapability | EdgeKind::ProvidesCapability
        )
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        EdgeKind::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    pub label: String,
    pub attrs: BTreeMap<String, AttrValue>,
}

impl Node {
    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        self.attrs.get(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub subject: Iri,
    #[serde(rename = "predicate")]
    pub kind: EdgeKind,
    pub object: Iri,
}

impl Edge {
    pub fn new(subject: Iri, kind: EdgeKind, object: Iri) -> Self {
        Edge { subject, kind, object }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> {} <{}>", self.subject, self.kind, self.object)
    }
}

/// Classification of a plausible cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CauseScope {
    ResourceSpecific,
    Global,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node <{0}> already exists")]
    DuplicateIri(Iri),
    #[error("invalid attribute `{name}` on <{iri}>: {reason}")]
    InvalidAttr { iri: Iri, name: String, reason: String },
    #[error("unknown node <{0}>")]
    UnknownNode(Iri),
    #[error("{edge} is not permitted between {subject_kind} and {object_kind}")]
    TypeViolation {
        edge: Edge,
        subject_kind: NodeKind,
        object_kind: NodeKind,
    },
    #[error("{0} would introduce a hasSuccessor cycle")]
    CycleIntroduced(Edge),
    #[error("edge {0} does not exist")]
    MissingEdge(Edge),
    #[error("<{iri}> is a {found}, expected {expected}")]
    KindMismatch {
        iri: Iri,
        expected: String,
        found: NodeKind,
    },
}

/// In-memory product-process-resource asset knowledge graph.
///
/// `version` increases on every effective mutation. `eligibility_token`
/// increases only on mutations that can change which resources may execute
/// which process, how long processes take, or their precedence; schedules
/// capture it so stale schedules are refused at commit time.
#[derive(Debug, Clone)]
pub struct AkgGraph {
    prefixes: PrefixTable,
    nodes: BTreeMap<Iri, Node>,
    edges: BTreeSet<Edge>,
    out_adj: BTreeMap<Iri, BTreeMap<EdgeKind, BTreeSet<Iri>>>,
    in_adj: BTreeMap<Iri, BTreeMap<EdgeKind, BTreeSet<Iri>>>,
    version: u64,
    eligibility_token: u64,
    check_successor_cycles: bool,
}

impl Default for AkgGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for AkgGraph {
    /// Content equality: prefixes, nodes (kind, label, attributes) and edges. Counters are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.prefixes == other.prefixes && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl AkgGraph {
    pub fn new() -> Self {
        AkgGraph {
            prefixes: PrefixTable::standard(),
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
            out_adj: BTreeMap::new(),
            in_adj: BTreeMap::new(),
            version: 0,
            eligibility_token: 0,
            check_successor_cycles: true,
        }
    }

    /// A graph that accepts `hasSuccessor` cycles, for loading documents that
    /// are about to be validated rather than executed.
    pub fn new_lenient() -> Self {
        AkgGraph {
            check_successor_cycles: false,
            ..Self::new()
        }
    }

    pub fn is_lenient(&self) -> bool {
        !self.check_successor_cycles
    }

    pub fn prefixes(&self) -> &PrefixTable {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixTable {
        &mut self.prefixes
    }

    pub fn resolve(&self, input: &str) -> Result<Iri, crate::iri::IriError> {
        self.prefixes.resolve(input)
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn eligibility_token(&self) -> u64 {
        self.eligibility_token
    }

    /// Moves the version counter forward so that it is at least `floor`.
    pub fn advance_version_to(&mut self, floor: u64) {
        self.version = self.version.max(floor);
    }

    pub fn advance_eligibility_token_to(&mut self, floor: u64) {
        self.eligibility_token = self.eligibility_token.max(floor);
    }

    fn touch(&mut self, planning: bool) {
        self.version += 1;
        if planning {
            self.eligibility_token += 1;
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, iri: &Iri) -> Option<&Node> {
        self.nodes.get(iri)
    }

    pub fn contains(&self, iri: &Iri) -> bool {
        self.nodes.contains_key(iri)
    }

    pub fn try_node(&self, iri: &Iri) -> Result<&Node, GraphError> {
        self.nodes.get(iri).ok_or_else(|| GraphError::UnknownNode(iri.clone()))
    }

    pub fn kind(&self, iri: &Iri) -> Result<NodeKind, GraphError> {
        self.try_node(iri).map(|n| n.kind)
    }

    /// Fails with `KindMismatch` unless the node's kind is one of `expected`.
    pub fn expect_kind(&self, iri: &Iri, expected: &[NodeKind]) -> Result<NodeKind, GraphError> {
        let kind = self.kind(iri)?;
        if expected.contains(&kind) {
            Ok(kind)
        } else {
            Err(GraphError::KindMismatch {
                iri: iri.clone(),
                expected: expected.iter().map(|k| k.name()).collect::<Vec<_>>().join(" or "),
                found: kind,
            })
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&Iri, &Node)> {
        self.nodes.iter()
    }

    /// Node IRIs of one kind, in lexicographic order.
    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &Iri> {
        self.nodes.iter().filter(move |(_, n)| n.kind == kind).map(|(i, _)| i)
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn has_edge(&self, subject: &Iri, kind: EdgeKind, object: &Iri) -> bool {
        self.out_adj
            .get(subject)
            .and_then(|m| m.get(&kind))
            .is_some_and(|s| s.contains(object))
    }

    pub fn add_node(
        &mut self,
        iri: Iri,
        kind: NodeKind,
        label: impl Into<String>,
        attrs: BTreeMap<String, AttrValue>,
    ) -> Result<&Node, GraphError> {
        if self.nodes.contains_key(&iri) {
            return Err(GraphError::DuplicateIri(iri));
        }
        for (name, value) in &attrs {
            check_attr(&iri, kind, name, value)?;
        }
        self.touch(matches!(
            kind,
            NodeKind::ProcessClass | NodeKind::RequiredCapability | NodeKind::ProvidedCapability | NodeKind::Resource
        ));
        let node = Node {
            kind,
            label: label.into(),
            attrs,
        };
        Ok(self.nodes.entry(iri).or_insert(node))
    }

    /// Sets (or with `None` removes) one attribute. Returns whether the graph changed.
    pub fn set_attr(&mut self, iri: &Iri, name: &str, value: Option<AttrValue>) -> Result<bool, GraphError> {
        let node = self.nodes.get(iri).ok_or_else(|| GraphError::UnknownNode(iri.clone()))?;
        let kind = node.kind;
        if let Some(v) = &value {
            check_attr(iri, kind, name, v)?;
        }
        if node.attrs.get(name) == value.as_ref() {
            return Ok(false);
        }
        let node = self.nodes.get_mut(iri).expect("checked above");
        match value {
            Some(v) => node.attrs.insert(name.to_string(), v),
            None => node.attrs.remove(name),
        };
        self.touch(matches!(
            kind,
            NodeKind::ProcessClass | NodeKind::RequiredCapability | NodeKind::ProvidedCapability | NodeKind::Resource
        ));
        Ok(true)
    }

    pub fn set_label(&mut self, iri: &Iri, label: impl Into<String>) -> Result<bool, GraphError> {
        let label = label.into();
        let node = self.nodes.get_mut(iri).ok_or_else(|| GraphError::UnknownNode(iri.clone()))?;
        if node.label == label {
            return Ok(false);
        }
        node.label = label;
        self.touch(false);
        Ok(true)
    }

    /// Checks endpoint existence and typing without inserting.
    pub fn check_edge(&self, edge: &Edge) -> Result<(), GraphError> {
        let sk = self.kind(&edge.subject)?;
        let ok = self.kind(&edge.object)?;
        if !edge.kind.permits(sk, ok) {
            return Err(GraphError::TypeViolation {
                edge: edge.clone(),
                subject_kind: sk,
                object_kind: ok,
            });
        }
        if edge.kind == EdgeKind::HasSuccessor
            && self.check_successor_cycles
            && !self.has_edge(&edge.subject, edge.kind, &edge.object)
            && (edge.subject == edge.object || self.successor_reaches(&edge.object, &edge.subject))
        {
            return Err(GraphError::CycleIntroduced(edge.clone()));
        }
        Ok(())
    }

    /// Inserts an edge. Returns `false` if it was already present.
    pub fn add_edge(&mut self, subject: &Iri, kind: EdgeKind, object: &Iri) -> Result<bool, GraphError> {
        let edge = Edge::new(subject.clone(), kind, object.clone());
        self.check_edge(&edge)?;
        if !self.edges.insert(edge) {
            return Ok(false);
        }
        self.out_adj
            .entry(subject.clone())
            .or_default()
            .entry(kind)
            .or_default()
            .insert(object.clone());
        self.in_adj
            .entry(object.clone())
            .or_default()
            .entry(kind)
            .or_default()
            .insert(subject.clone());
        self.touch(kind.affects_planning());
        Ok(true)
    }

    /// Removes an edge. Fails with `MissingEdge` if it is absent.
    pub fn remove_edge(&mut self, subject: &Iri, kind: EdgeKind, object: &Iri) -> Result<(), GraphError> {
        let edge = Edge::new(subject.clone(), kind, object.clone());
        if !self.edges.remove(&edge) {
            return Err(GraphError::MissingEdge(edge));
        }
        if let Some(set) = self.out_adj.get_mut(subject).and_then(|m| m.get_mut(&kind)) {
            set.remove(object);
        }
        if let Some(set) = self.in_adj.get_mut(object).and_then(|m| m.get_mut(&kind)) {
            set.remove(subject);
        }
        self.touch(kind.affects_planning());
        Ok(())
    }

    /// Neighbours over one edge kind, sorted lexicographically by IRI.
    pub fn neighbors(&self, iri: &Iri, kind: EdgeKind, direction: Direction) -> Result<Vec<Iri>, GraphError> {
        if !self.nodes.contains_key(iri) {
            return Err(GraphError::UnknownNode(iri.clone()));
        }
        Ok(self.adjacent(iri, kind, direction).cloned().collect())
    }

    /// Like [`neighbors`](Self::neighbors) but borrowing and without the existence check.
    pub fn adjacent<'a>(&'a self, iri: &Iri, kind: EdgeKind, direction: Direction) -> impl Iterator<Item = &'a Iri> + 'a {
        let adj = match direction {
            Direction::Out => &self.out_adj,
            Direction::In => &self.in_adj,
        };
        adj.get(iri).and_then(|m| m.get(&kind)).into_iter().flatten()
    }

    pub fn out_degree(&self, iri: &Iri) -> usize {
        self.out_adj.get(iri).map_or(0, |m| m.values().map(BTreeSet::len).sum())
    }

    pub fn in_degree(&self, iri: &Iri) -> usize {
        self.in_adj.get(iri).map_or(0, |m| m.values().map(BTreeSet::len).sum())
    }

    fn successor_reaches(&self, from: &Iri, target: &Iri) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == target {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.adjacent(n, EdgeKind::HasSuccessor, Direction::Out));
            }
        }
        false
    }

    /// Resource-specific iff the cause is the object of at least one `definesCause` edge.
    pub fn cause_scope(&self, cause: &Iri) -> Result<CauseScope, GraphError> {
        self.expect_kind(cause, &[NodeKind::PlausibleCause])?;
        Ok(if self.adjacent(cause, EdgeKind::DefinesCause, Direction::In).next().is_some() {
            CauseScope::ResourceSpecific
        } else {
            CauseScope::Global
        })
    }

    /// Copy restricted to class-level nodes and the edges between them.
    pub fn class_level_subgraph(&self) -> AkgGraph {
        let mut g = AkgGraph {
            prefixes: self.prefixes.clone(),
            ..AkgGraph::new_lenient()
        };
        for (iri, node) in &self.nodes {
            if node.kind.level() == Level::Class {
                g.nodes.insert(iri.clone(), node.clone());
            }
        }
        for e in &self.edges {
            if g.nodes.contains_key(&e.subject) && g.nodes.contains_key(&e.object) {
                g.add_edge(&e.subject, e.kind, &e.object).expect("typed in source graph");
            }
        }
        g.check_successor_cycles = self.check_successor_cycles;
        g
    }

    /// Serializable full export (prefixes, nodes, edges).
    pub fn export(&self) -> GraphExport<'_> {
        GraphExport {
            prefixes: &self.prefixes,
            nodes: self
                .nodes
                .iter()
                .map(|(iri, n)| NodeExport {
                    iri,
                    kind: n.kind,
                    label: &n.label,
                    attrs: &n.attrs,
                })
                .collect(),
            edges: self.edges.iter().collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GraphExport<'a> {
    pub prefixes: &'a PrefixTable,
    pub nodes: Vec<NodeExport<'a>>,
    pub edges: Vec<&'a Edge>,
}

#[derive(Debug, Serialize)]
pub struct NodeExport<'a> {
    pub iri: &'a Iri,
    pub kind: NodeKind,
    pub label: &'a str,
    pub attrs: &'a BTreeMap<String, AttrValue>,
}

/// Attribute names are plain local names, or absolute IRIs outside the reserved vocabulary.
pub fn is_valid_attr_name(name: &str) -> bool {
    if is_plain_local(name) {
        return true;
    }
    name.contains(':')
        && Iri::new(name).is_ok()
        && !name.starts_with(vocab::PPR_NS)
        && !name.starts_with(vocab::ATTR_NS)
        && name != vocab::RDF_TYPE
        && name != vocab::RDFS_LABEL
}

fn check_attr(iri: &Iri, kind: NodeKind, name: &str, value: &AttrValue) -> Result<(), GraphError> {
    let invalid = |reason: String| GraphError::InvalidAttr {
        iri: iri.clone(),
        name: name.to_string(),
        reason,
    };
    if !is_valid_attr_name(name) {
        return Err(invalid("name must be a plain local name or an absolute IRI".into()));
    }
    if let AttrValue::Set(s) = value {
        if s.is_empty() {
            return Err(invalid("text sets must not be empty".into()));
        }
    }
    match (kind, name) {
        (NodeKind::ProcessClass, vocab::DURATION_S) => {
            if !value.as_number().and_then(|n| n.as_u64()).is_some_and(|d| d >= 1) {
                return Err(invalid("duration must be a positive integer number of seconds".into()));
            }
        }
        (NodeKind::PlausibleCause, vocab::WEIGHT) => {
            if !value.as_number().is_some_and(|n| (0.0..=1.0).contains(&n.value())) {
                return Err(invalid("weight must be a number in [0, 1]".into()));
            }
        }
        (NodeKind::RequiredCapability | NodeKind::ProvidedCapability, vocab::CAPABILITY_KIND) => {
            if value.as_ref_iri().is_none() {
                return Err(invalid("capability kind must be an IRI".into()));
            }
        }
        (NodeKind::RequiredCapability, _) => match Constraint::from_attr(name, value) {
            Ok(_) | Err(ConstraintError::NotAConstraint) => {}
            Err(e) => return Err(invalid(e.to_string())),
        },
        _ => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://ex.org/{s}")).unwrap()
    }

    fn add(g: &mut AkgGraph, name: &str, kind: NodeKind) {
        g.add_node(iri(name), kind, name, BTreeMap::new()).unwrap();
    }

    #[test]
    fn add_node_into_empty_graph() {
        let mut g = AkgGraph::new();
        let n = g.add_node(iri("Cell1"), NodeKind::ProductClass, "Battery cell", BTreeMap::new()).unwrap();
        assert_eq!(n.kind, NodeKind::ProductClass);
        assert!(g.contains(&iri("Cell1")));
    }

    #[test]
    fn duplicate_iri_rejected() {
        let mut g = AkgGraph::new();
        add(&mut g, "Cell1", NodeKind::ProductClass);
        let err = g.add_node(iri("Cell1"), NodeKind::ProductClass, "", BTreeMap::new()).unwrap_err();
        assert_eq!(err, GraphError::DuplicateIri(iri("Cell1")));
    }

    #[test]
    fn attribute_read_back() {
        let mut g = AkgGraph::new();
        let attrs = BTreeMap::from([("payload_kg".to_string(), AttrValue::int(12))]);
        g.add_node(iri("Robot1"), NodeKind::Resource, "Disassembly robot", attrs).unwrap();
        let v = g.node(&iri("Robot1")).unwrap().attr("payload_kg").unwrap();
        assert_eq!(v.as_number().unwrap().value(), 12.0);
    }

    #[test]
    fn invalid_attrs() {
        let mut g = AkgGraph::new();
        let bad = [
            (NodeKind::ProcessClass, "duration_s", AttrValue::int(0)),
            (NodeKind::ProcessClass, "duration_s", AttrValue::number(1.5)),
            (NodeKind::PlausibleCause, "weight", AttrValue::number(1.5)),
            (NodeKind::PlausibleCause, "weight", AttrValue::text("high")),
            (NodeKind::Resource, "bad name", AttrValue::int(1)),
            (NodeKind::Resource, "tags", AttrValue::Set(BTreeSet::new())),
            (NodeKind::RequiredCapability, "torque_nm__ge", AttrValue::text("x")),
            (NodeKind::RequiredCapability, "tool__in", AttrValue::text("x")),
            (NodeKind::ProvidedCapability, "capability_kind", AttrValue::text("x")),
        ];
        for (i, (kind, name, value)) in bad.into_iter().enumerate() {
            let attrs = BTreeMap::from([(name.to_string(), value)]);
            let r = g.add_node(iri(&format!("n{i}")), kind, "", attrs);
            assert!(matches!(r, Err(GraphError::InvalidAttr { .. })), "{i}: {r:?}");
        }
        assert!(g.is_empty());
    }

    #[test]
    fn permitted_edge() {
        let mut g = AkgGraph::new();
        add(&mut g, "Unscrew", NodeKind::ProcessClass);
        add(&mut g, "ReqTorque", NodeKind::RequiredCapability);
        assert!(g.add_edge(&iri("Unscrew"), EdgeKind::RequiresCapability, &iri("ReqTorque")).unwrap());
        assert!(g.has_edge(&iri("Unscrew"), EdgeKind::RequiresCapability, &iri("ReqTorque")));
        // set semantics
        assert!(!g.add_edge(&iri("Unscrew"), EdgeKind::RequiresCapability, &iri("ReqTorque")).unwrap());
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn typing_violation() {
        let mut g = AkgGraph::new();
        add(&mut g, "Unscrew", NodeKind::ProcessClass);
        add(&mut g, "Robot1", NodeKind::Resource);
        let err = g.add_edge(&iri("Robot1"), EdgeKind::HasSuccessor, &iri("Unscrew")).unwrap_err();
        assert!(matches!(err, GraphError::TypeViolation { subject_kind: NodeKind::Resource, .. }));
        let err = g.add_edge(&iri("Robot1"), EdgeKind::HasSuccessor, &iri("Nope")).unwrap_err();
        assert_eq!(err, GraphError::UnknownNode(iri("Nope")));
    }

    #[test]
    fn successor_cycle_rejected() {
        let mut g = AkgGraph::new();
        add(&mut g, "A", NodeKind::ProcessClass);
        add(&mut g, "B", NodeKind::ProcessClass);
        add(&mut g, "C", NodeKind::ProcessClass);
        g.add_edge(&iri("A"), EdgeKind::HasSuccessor, &iri("B")).unwrap();
        assert!(matches!(
            g.add_edge(&iri("B"), EdgeKind::HasSuccessor, &iri("A")),
            Err(GraphError::CycleIntroduced(_))
        ));
        assert!(matches!(
            g.add_edge(&iri("C"), EdgeKind::HasSuccessor, &iri("C")),
            Err(GraphError::CycleIntroduced(_))
        ));
        g.add_edge(&iri("B"), EdgeKind::HasSuccessor, &iri("C")).unwrap();
        assert!(g.add_edge(&iri("C"), EdgeKind::HasSuccessor, &iri("A")).is_err());
        // re-adding an existing edge is not a cycle
        assert!(!g.add_edge(&iri("A"), EdgeKind::HasSuccessor, &iri("B")).unwrap());
    }

    #[test]
    fn lenient_graph_accepts_cycles() {
        let mut g = AkgGraph::new_lenient();
        add(&mut g, "A", NodeKind::ProcessClass);
        add(&mut g, "B", NodeKind::ProcessClass);
        g.add_edge(&iri("A"), EdgeKind::HasSuccessor, &iri("B")).unwrap();
        g.add_edge(&iri("B"), EdgeKind::HasSuccessor, &iri("A")).unwrap();
    }

    #[test]
    fn neighbors_sorted_and_directional() {
        let mut g = AkgGraph::new();
        add(&mut g, "R", NodeKind::Resource);
        add(&mut g, "CapB", NodeKind::ProvidedCapability);
        add(&mut g, "CapA", NodeKind::ProvidedCapability);
        assert!(g.neighbors(&iri("R"), EdgeKind::ProvidesCapability, Direction::Out).unwrap().is_empty());
        g.add_edge(&iri("R"), EdgeKind::ProvidesCapability, &iri("CapB")).unwrap();
        g.add_edge(&iri("R"), EdgeKind::ProvidesCapability, &iri("CapA")).unwrap();
        assert_eq!(
            g.neighbors(&iri("R"), EdgeKind::ProvidesCapability, Direction::Out).unwrap(),
            vec![iri("CapA"), iri("CapB")]
        );
        assert_eq!(
            g.neighbors(&iri("CapA"), EdgeKind::ProvidesCapability, Direction::In).unwrap(),
            vec![iri("R")]
        );
        assert!(matches!(
            g.neighbors(&iri("X"), EdgeKind::Affects, Direction::In),
            Err(GraphError::UnknownNode(_))
        ));
    }

    #[test]
    fn remove_edge_and_versions() {
        let mut g = AkgGraph::new();
        add(&mut g, "R", NodeKind::Resource);
        add(&mut g, "Cap", NodeKind::ProvidedCapability);
        let (v, t) = (g.version(), g.eligibility_token());
        g.add_edge(&iri("R"), EdgeKind::ProvidesCapability, &iri("Cap")).unwrap();
        assert!(g.version() > v && g.eligibility_token() > t);
        g.remove_edge(&iri("R"), EdgeKind::ProvidesCapability, &iri("Cap")).unwrap();
        assert!(matches!(
            g.remove_edge(&iri("R"), EdgeKind::ProvidesCapability, &iri("Cap")),
            Err(GraphError::MissingEdge(_))
        ));
        add(&mut g, "U", NodeKind::UndesiredCondition);
        let t = g.eligibility_token();
        g.add_edge(&iri("U"), EdgeKind::Affects, &iri("R")).unwrap();
        assert_eq!(g.eligibility_token(), t);
    }

    #[test]
    fn cause_scope_is_total() {
        let mut g = AkgGraph::new();
        add(&mut g, "R", NodeKind::Resource);
        add(&mut g, "C1", NodeKind::PlausibleCause);
        add(&mut g, "C2", NodeKind::PlausibleCause);
        g.add_edge(&iri("R"), EdgeKind::DefinesCause, &iri("C1")).unwrap();
        assert_eq!(g.cause_scope(&iri("C1")).unwrap(), CauseScope::ResourceSpecific);
        assert_eq!(g.cause_scope(&iri("C2")).unwrap(), CauseScope::Global);
        assert!(matches!(g.cause_scope(&iri("R")), Err(GraphError::KindMismatch { .. })));
    }

    #[test]
    fn typing_table_domains() {
        assert_eq!(EdgeKind::ProvidesCapability.range(), BTreeSet::from([NodeKind::ProvidedCapability]));
        assert_eq!(EdgeKind::Affects.range().len(), 4);
        for k in EdgeKind::ALL {
            assert_eq!(EdgeKind::from_predicate_iri(&k.predicate_iri()), Some(k));
        }
        for k in NodeKind::ALL {
            assert_eq!(NodeKind::from_class_iri(&k.class_iri()), Some(k));
        }
    }
}
