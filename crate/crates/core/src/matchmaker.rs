//! Capability matchmaking: which resources can execute which process.
//!
//! A provided capability matches a required one when their capability kinds
//! are equal and every constraint of the requirement holds on the provided
//! attributes. A resource is eligible for a process when each of the
//! process's requirements is matched by at least one of the resource's
//! provided capabilities.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attr::AttrValue;
use crate::constraint::{Constraint, TypeMismatch};
use crate::graph::{AkgGraph, Direction, EdgeKind, GraphError, NodeKind};
use crate::iri::Iri;
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredCapabilitySpec {
    pub capability_kind: Iri,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvidedCapabilitySpec {
    pub capability_kind: Iri,
    pub attributes: BTreeMap<String, AttrValue>,
}

fn capability_kind(graph: &AkgGraph, iri: &Iri) -> Iri {
    graph
        .node(iri)
        .and_then(|n| n.attr(vocab::CAPABILITY_KIND))
        .and_then(AttrValue::as_ref_iri)
        .cloned()
        .unwrap_or_else(|| iri.clone())
}

impl RequiredCapabilitySpec {
    /// Reads a required-capability node. Its kind defaults to its own IRI.
    pub fn from_graph(graph: &AkgGraph, iri: &Iri) -> Result<Self, GraphError> {
        graph.expect_kind(iri, &[NodeKind::RequiredCapability])?;
        let node = graph.try_node(iri)?;
        let constraints = node
            .attrs
            .iter()
            .filter_map(|(name, value)| Constraint::from_attr(name, value).ok())
            .collect();
        Ok(RequiredCapabilitySpec {
            capability_kind: capability_kind(graph, iri),
            constraints,
        })
    }
}

impl ProvidedCapabilitySpec {
    pub fn from_graph(graph: &AkgGraph, iri: &Iri) -> Result<Self, GraphError> {
        graph.expect_kind(iri, &[NodeKind::ProvidedCapability])?;
        let mut attributes = graph.try_node(iri)?.attrs.clone();
        attributes.remove(vocab::CAPABILITY_KIND);
        Ok(ProvidedCapabilitySpec {
            capability_kind: capability_kind(graph, iri),
            attributes,
        })
    }
}

/// Kind equality plus conjunction of all constraints.
///
/// Kinds are compared first; constraints of a different-kind capability are
/// never evaluated. All constraints are evaluated so that a type mismatch is
/// reported even when an earlier constraint already failed.
pub fn capability_matches(req: &RequiredCapabilitySpec, prov: &ProvidedCapabilitySpec) -> Result<bool, TypeMismatch> {
    if req.capability_kind != prov.capability_kind {
        return Ok(false);
    }
    let mut all = true;
    for c in &req.constraints {
        all &= c.evaluate(&prov.attributes)?;
    }
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("<{0}> is not a process class or process step instance")]
    NotAProcess(Iri),
    #[error("requirement <{requirement}> against capability <{capability}>: {source}")]
    TypeMismatch {
        requirement: Iri,
        capability: Iri,
        #[source]
        source: Box<TypeMismatch>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub satisfied: bool,
    /// The provided attribute value the constraint was checked against.
    pub witness: Option<AttrValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub capability: Iri,
    pub matches: bool,
    pub checks: Vec<ConstraintCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementCheck {
    pub requirement: Iri,
    pub capability_kind: Iri,
    pub satisfied: bool,
    /// Same-kind provided capabilities of the resource, each with its constraint checks.
    pub candidates: Vec<CandidateCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceExplanation {
    pub resource: Iri,
    pub eligible: bool,
    pub requirements: Vec<RequirementCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchReport {
    pub step: Iri,
    pub process: Iri,
    pub eligible: Vec<Iri>,
    pub explanations: Vec<ResourceExplanation>,
}

/// The process class whose requirements govern `step`.
pub fn process_of(graph: &AkgGraph, step: &Iri) -> Result<Iri, MatchError> {
    match graph.kind(step)? {
        NodeKind::ProcessClass => Ok(step.clone()),
        NodeKind::ProcessStepInstance => {
            let classes: Vec<&Iri> = graph
                .adjacent(step, EdgeKind::InstanceOf, Direction::Out)
                .filter(|c| graph.kind(c) == Ok(NodeKind::ProcessClass))
                .collect();
            match classes.as_slice() {
                [one] => Ok((*one).clone()),
                _ => Err(MatchError::NotAProcess(step.clone())),
            }
        }
        _ => Err(MatchError::NotAProcess(step.clone())),
    }
}

fn requirements_of(graph: &AkgGraph, process: &Iri) -> Result<Vec<(Iri, RequiredCapabilitySpec)>, GraphError> {
    graph
        .adjacent(process, EdgeKind::RequiresCapability, Direction::Out)
        .map(|r| RequiredCapabilitySpec::from_graph(graph, r).map(|spec| (r.clone(), spec)))
        .collect()
}

fn explain_resource(
    graph: &AkgGraph,
    resource: &Iri,
    requirements: &[(Iri, RequiredCapabilitySpec)],
) -> Result<ResourceExplanation, MatchError> {
    let provided: Vec<(Iri, ProvidedCapabilitySpec)> = graph
        .adjacent(resource, EdgeKind::ProvidesCapability, Direction::Out)
        .map(|c| ProvidedCapabilitySpec::from_graph(graph, c).map(|spec| (c.clone(), spec)))
        .collect::<Result<_, _>>()?;
    let mut checks = Vec::with_capacity(requirements.len());
    for (req_iri, req) in requirements {
        let mut candidates = Vec::new();
        for (cap_iri, prov) in provided.iter().filter(|(_, p)| p.capability_kind == req.capability_kind) {
            let mut constraint_checks = Vec::with_capacity(req.constraints.len());
            for c in &req.constraints {
                let satisfied = c.evaluate(&prov.attributes).map_err(|source| MatchError::TypeMismatch {
                    requirement: req_iri.clone(),
                    capability: cap_iri.clone(),
                    source: Box::new(source),
                })?;
                constraint_checks.push(ConstraintCheck {
                    constraint: c.clone(),
                    satisfied,
                    witness: prov.attributes.get(&c.attribute).cloned(),
                });
            }
            candidates.push(CandidateCheck {
                capability: cap_iri.clone(),
                matches: constraint_checks.iter().all(|c| c.satisfied),
                checks: constraint_checks,
            });
        }
        checks.push(RequirementCheck {
            requirement: req_iri.clone(),
            capability_kind: req.capability_kind.clone(),
            satisfied: candidates.iter().any(|c| c.matches),
            candidates,
        });
    }
    Ok(ResourceExplanation {
        resource: resource.clone(),
        eligible: checks.iter().all(|r| r.satisfied),
        requirements: checks,
    })
}

/// Eligible resources for a process class or step instance, with per-constraint explanations.
pub fn eligible_resources(graph: &AkgGraph, step: &Iri) -> Result<MatchReport, MatchError> {
    let process = process_of(graph, step)?;
    let requirements = requirements_of(graph, &process)?;
    let mut explanations = Vec::new();
    for r in graph.nodes_of_kind(NodeKind::Resource) {
        explanations.push(explain_resource(graph, r, &requirements)?);
    }
    Ok(MatchReport {
        step: step.clone(),
        process,
        eligible: explanations.iter().filter(|e| e.eligible).map(|e| e.resource.clone()).collect(),
        explanations,
    })
}

/// Eligible resource set of every process class.
pub fn eligibility_map(graph: &AkgGraph) -> Result<BTreeMap<Iri, BTreeSet<Iri>>, MatchError> {
    graph
        .nodes_of_kind(NodeKind::ProcessClass)
        .map(|p| {
            let report = eligible_resources(graph, p)?;
            Ok((p.clone(), report.eligible.into_iter().collect()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapabilityAction {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactEntry {
    pub process: Iri,
    pub before: Vec<Iri>,
    pub after: Vec<Iri>,
    pub starved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub resource: Iri,
    pub capability: Iri,
    pub action: CapabilityAction,
    /// Processes whose eligible set changed, sorted by process IRI.
    pub changes: Vec<ImpactEntry>,
}

impl ImpactReport {
    pub fn starved(&self) -> impl Iterator<Item = &Iri> {
        self.changes.iter().filter(|c| c.starved).map(|c| &c.process)
    }
}

/// Adds or removes a `providesCapability` edge and reports which processes'
/// eligible sets changed. On error the graph is left as it was.
pub fn apply_capability_change(
    graph: &mut AkgGraph,
    resource: &Iri,
    capability: &Iri,
    action: CapabilityAction,
) -> Result<ImpactReport, MatchError> {
    graph.expect_kind(resource, &[NodeKind::Resource])?;
    graph.expect_kind(capability, &[NodeKind::ProvidedCapability])?;
    let present = graph.has_edge(resource, EdgeKind::ProvidesCapability, capability);
    if action == CapabilityAction::Remove && !present {
        return Err(GraphError::MissingEdge(crate::graph::Edge::new(
            resource.clone(),
            EdgeKind::ProvidesCapability,
            capability.clone(),
        ))
        .into());
    }
    let before = eligibility_map(graph)?;
    let changed = match action {
        CapabilityAction::Add => graph.add_edge(resource, EdgeKind::ProvidesCapability, capability)?,
        CapabilityAction::Remove => {
            graph.remove_edge(resource, EdgeKind::ProvidesCapability, capability)?;
            true
        }
    };
    let after = match eligibility_map(graph) {
        Ok(a) => a,
        Err(e) => {
            if changed {
                match action {
                    CapabilityAction::Add => graph.remove_edge(resource, EdgeKind::ProvidesCapability, capability)?,
                    CapabilityAction::Remove => {
                        graph.add_edge(resource, EdgeKind::ProvidesCapability, capability)?;
                    }
                }
            }
            return Err(e);
        }
    };
    let changes = after
        .iter()
        .filter(|(p, set)| before.get(*p) != Some(set))
        .map(|(p, set)| ImpactEntry {
            process: p.clone(),
            before: before.get(p).map(|s| s.iter().cloned().collect()).unwrap_or_default(),
            after: set.iter().cloned().collect(),
            starved: set.is_empty(),
        })
        .collect();
    Ok(ImpactReport {
        resource: resource.clone(),
        capability: capability.clone(),
        action,
        changes,
    })
}
