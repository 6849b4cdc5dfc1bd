//! Rule-based structural validation.
//!
//! | Rule | Severity | Check |
//! |------|----------|-------|
//! | V1 | error   | every process class requires at least one capability |
//! | V2 | error   | every resource provides at least one capability |
//! | V3 | error   | no edge links a process class directly to a resource |
//! | V4 | warning | every undesired condition has at least one plausible cause |
//! | V5 | error   | a resource-scoped cause is defined by exactly one resource |
//! | V6 | error   | product and step instances have exactly one `instanceOf` |
//! | V7 | error   | `hasSuccessor` over process classes is acyclic |
//! | V8 | warning | required-capability constraints name attributes some provided capability carries |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constraint::Constraint;
use crate::graph::{AkgGraph, Direction, EdgeKind, NodeKind};
use crate::iri::Iri;
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    V7,
    V8,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::V1,
        RuleId::V2,
        RuleId::V3,
        RuleId::V4,
        RuleId::V5,
        RuleId::V6,
        RuleId::V7,
        RuleId::V8,
    ];

    pub fn severity(self) -> Severity {
        match self {
            RuleId::V4 | RuleId::V8 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: RuleId,
    pub severity: Severity,
    pub subject: Iri,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{} {sev} <{}>: {}", self.rule_id, self.subject, self.message)
    }
}

/// Runs every rule. The result is sorted by `(rule_id, subject, message)`.
pub fn validate(graph: &AkgGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule_id: RuleId, subject: &Iri, message: String| {
        out.push(Violation {
            rule_id,
            severity: rule_id.severity(),
            subject: subject.clone(),
            message,
        })
    };
    let has_out = |iri: &Iri, kind: EdgeKind| graph.adjacent(iri, kind, Direction::Out).next().is_some();

    for p in graph.nodes_of_kind(NodeKind::ProcessClass) {
        if !has_out(p, EdgeKind::RequiresCapability) {
            push(RuleId::V1, p, "process class has no required capability".into());
        }
    }
    for r in graph.nodes_of_kind(NodeKind::Resource) {
        if !has_out(r, EdgeKind::ProvidesCapability) {
            push(RuleId::V2, r, "resource provides no capability".into());
        }
    }
    for e in graph.edges() {
        if graph.kind(&e.subject) == Ok(NodeKind::ProcessClass) && graph.kind(&e.object) == Ok(NodeKind::Resource) {
            push(
                RuleId::V3,
                &e.subject,
                format!(
                    "process class is assigned to resource <{}> via {}; assign required capabilities instead",
                    e.object, e.kind
                ),
            );
        }
    }
    for c in graph.nodes_of_kind(NodeKind::UndesiredCondition) {
        if !has_out(c, EdgeKind::HasPlausibleCause) {
            push(RuleId::V4, c, "undesired condition has no plausible cause".into());
        }
    }
    for cause in graph.nodes_of_kind(NodeKind::PlausibleCause) {
        let definers: Vec<&Iri> = graph.adjacent(cause, EdgeKind::DefinesCause, Direction::In).collect();
        if definers.len() > 1 {
            let names: Vec<String> = definers.iter().map(|d| format!("<{d}>")).collect();
            push(
                RuleId::V5,
                cause,
                format!("cause is scoped to several resources ({}); its scope is ambiguous", names.join(", ")),
            );
        }
    }
    for (iri, node) in graph.nodes() {
        if node.kind.is_class_instance() {
            let n = graph.adjacent(iri, EdgeKind::InstanceOf, Direction::Out).count();
            if n != 1 {
                push(RuleId::V6, iri, format!("instance has {n} instanceOf edges, expected exactly 1"));
            }
        }
    }
    for component in successor_cycles(graph) {
        let members: Vec<String> = component.iter().map(|m| format!("<{m}>")).collect();
        push(
            RuleId::V7,
            component.first().expect("non-empty"),
            format!("hasSuccessor cycle through {}", members.join(", ")),
        );
    }
    let provided_attrs: BTreeSet<&str> = graph
        .nodes_of_kind(NodeKind::ProvidedCapability)
        .flat_map(|c| graph.node(c).expect("listed").attrs.keys())
        .map(String::as_str)
        .filter(|a| *a != vocab::CAPABILITY_KIND)
        .collect();
    for req in graph.nodes_of_kind(NodeKind::RequiredCapability) {
        let node = graph.node(req).expect("listed");
        let missing: BTreeSet<String> = node
            .attrs
            .iter()
            .filter_map(|(name, value)| Constraint::from_attr(name, value).ok())
            .filter(|c| !provided_attrs.contains(c.attribute.as_str()))
            .map(|c| c.attribute)
            .collect();
        if !missing.is_empty() {
            push(
                RuleId::V8,
                req,
                format!(
                    "constraint attributes not carried by any provided capability: {}",
                    missing.into_iter().collect::<Vec<_>>().join(", ")
                ),
            );
        }
    }
    out.sort();
    out
}

/// Strongly connected components of `hasSuccessor` over process classes that
/// contain a cycle, each sorted, listed by smallest member.
fn successor_cycles(graph: &AkgGraph) -> Vec<Vec<Iri>> {
    let nodes: Vec<&Iri> = graph.nodes_of_kind(NodeKind::ProcessClass).collect();
    let index_of: BTreeMap<&Iri, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let succ: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| {
            graph
                .adjacent(n, EdgeKind::HasSuccessor, Direction::Out)
                .filter_map(|m| index_of.get(m).copied())
                .collect()
        })
        .collect();

    // Tarjan, iterative
    let n = nodes.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut components = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut child)) = work.last_mut() {
            if *child == 0 && index[v] == usize::MAX {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = succ[v].get(*child) {
                *child += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("on stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                let cyclic = comp.len() > 1 || succ[v].contains(&v);
                if cyclic {
                    let mut members: Vec<Iri> = comp.into_iter().map(|i| nodes[i].clone()).collect();
                    members.sort();
                    components.push(members);
                }
            }
        }
    }
    components.sort();
    components
}
