//! Ranked plausible causes for an observed undesired condition.
//!
//! Global causes linked from the condition are always reported. A
//! resource-scoped cause is reported only when one of its defining resources
//! is in the context's resolved resource set, which is the first non-empty of:
//! the observed resource, the affected step's `allocatedTo` resources, the
//! resources eligible for the affected step. With neither observation nor
//! step, every resource is in the set.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AkgGraph, CauseScope, Direction, Edge, EdgeKind, GraphError, NodeKind};
use crate::iri::Iri;
use crate::matchmaker::{eligible_resources, MatchError};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationContext {
    pub condition: Iri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affected_step: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_on_resource: Option<Iri>,
}

impl ObservationContext {
    pub fn new(condition: Iri) -> Self {
        ObservationContext {
            condition,
            affected_step: None,
            observed_on_resource: None,
        }
    }

    pub fn on_resource(mut self, resource: Iri) -> Self {
        self.observed_on_resource = Some(resource);
        self
    }

    pub fn at_step(mut self, step: Iri) -> Self {
        self.affected_step = Some(step);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCause {
    pub cause: Iri,
    pub label: String,
    pub scope: CauseScope,
    pub weight: f64,
    /// The `hasPlausibleCause` edge, then for scoped causes the `definesCause`
    /// edges from resolved resources.
    pub evidence: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub context: ObservationContext,
    /// Resources scoped causes were filtered against, sorted.
    pub resolved_resources: Vec<Iri>,
    /// Sorted by weight descending, then cause IRI ascending.
    pub causes: Vec<RankedCause>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosisError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Prior weight of a cause, 0.5 when unset.
pub fn cause_weight(graph: &AkgGraph, cause: &Iri) -> f64 {
    graph
        .node(cause)
        .and_then(|n| n.attr(vocab::WEIGHT))
        .and_then(|v| v.as_number())
        .map_or(vocab::DEFAULT_WEIGHT, |n| n.value())
}

/// Resource set used to filter scoped causes.
pub fn resolve_resources(graph: &AkgGraph, ctx: &ObservationContext) -> Result<BTreeSet<Iri>, DiagnosisError> {
    if let Some(r) = &ctx.observed_on_resource {
        return Ok(BTreeSet::from([r.clone()]));
    }
    if let Some(step) = &ctx.affected_step {
        let allocated: BTreeSet<Iri> = graph
            .adjacent(step, EdgeKind::AllocatedTo, Direction::Out)
            .cloned()
            .collect();
        if !allocated.is_empty() {
            return Ok(allocated);
        }
        return Ok(eligible_resources(graph, step)?.eligible.into_iter().collect());
    }
    Ok(graph.nodes_of_kind(NodeKind::Resource).cloned().collect())
}

fn check_context(graph: &AkgGraph, ctx: &ObservationContext) -> Result<(), GraphError> {
    graph.expect_kind(&ctx.condition, &[NodeKind::UndesiredCondition])?;
    if let Some(step) = &ctx.affected_step {
        graph.expect_kind(step, &[NodeKind::ProcessClass, NodeKind::ProcessStepInstance])?;
    }
    if let Some(r) = &ctx.observed_on_resource {
        graph.expect_kind(r, &[NodeKind::Resource])?;
    }
    Ok(())
}

pub fn plausible_causes(graph: &AkgGraph, ctx: &ObservationContext) -> Result<DiagnosisReport, DiagnosisError> {
    check_context(graph, ctx)?;
    let resolved = resolve_resources(graph, ctx)?;
    let mut causes = Vec::new();
    for cause in graph.adjacent(&ctx.condition, EdgeKind::HasPlausibleCause, Direction::Out) {
        let link = Edge::new(ctx.condition.clone(), EdgeKind::HasPlausibleCause, cause.clone());
        let scope = graph.cause_scope(cause)?;
        let evidence = match scope {
            CauseScope::Global => vec![link],
            CauseScope::ResourceSpecific => {
                let scoping: Vec<Edge> = graph
                    .adjacent(cause, EdgeKind::DefinesCause, Direction::In)
                    .filter(|r| resolved.contains(*r))
                    .map(|r| Edge::new(r.clone(), EdgeKind::DefinesCause, cause.clone()))
                    .collect();
                if scoping.is_empty() {
                    continue;
                }
                std::iter::once(link).chain(scoping).collect()
            }
        };
        causes.push(RankedCause {
            cause: cause.clone(),
            label: graph.try_node(cause)?.label.clone(),
            scope,
            weight: cause_weight(graph, cause),
            evidence,
        });
    }
    causes.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.cause.cmp(&b.cause))
    });
    Ok(DiagnosisReport {
        context: ctx.clone(),
        resolved_resources: resolved.into_iter().collect(),
        causes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub condition: Iri,
    pub label: String,
    pub affects: Vec<Iri>,
}

/// Every undesired condition, or those with an `affects` edge to `asset`. Sorted by IRI.
pub fn condition_catalog(graph: &AkgGraph, asset: Option<&Iri>) -> Result<Vec<ConditionEntry>, GraphError> {
    if let Some(a) = asset {
        graph.try_node(a)?;
    }
    Ok(graph
        .nodes_of_kind(NodeKind::UndesiredCondition)
        .filter(|c| asset.is_none_or(|a| graph.has_edge(c, EdgeKind::Affects, a)))
        .map(|c| ConditionEntry {
            condition: c.clone(),
            label: graph.node(c).map(|n| n.label.clone()).unwrap_or_default(),
            affects: graph.adjacent(c, EdgeKind::Affects, Direction::Out).cloned().collect(),
        })
        .collect())
}
