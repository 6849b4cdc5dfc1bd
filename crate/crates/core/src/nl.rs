//! Natural-language intent routing.
//!
//! A backend only classifies a question into an [`IntentParse`] (intent plus
//! slot). [`answer`] then runs the matching engine operation and renders the
//! reply from fixed templates, so every fact in an answer comes from the graph.
//! All intents are read-only: scheduling runs on a private copy of the graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnosis::{plausible_causes, DiagnosisError, DiagnosisReport, ObservationContext};
use crate::graph::{AkgGraph, CauseScope, Direction, Edge, EdgeKind, GraphError, NodeKind};
use crate::iri::Iri;
use crate::matchmaker::{eligible_resources, MatchError, MatchReport};
use crate::run::{instantiate_run_at, RunError};
use crate::scheduler::{build_instance, schedule, Schedule, ScheduleError, SchedulePolicy};
use crate::AttrValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intent {
    Diagnose,
    Schedule,
    Match,
    Lookup,
    Unknown,
}

impl Intent {
    /// Node kinds a slot of this intent may refer to; `None` means any.
    pub fn slot_kind(self) -> Option<NodeKind> {
        match self {
            Intent::Diagnose => Some(NodeKind::UndesiredCondition),
            Intent::Schedule => Some(NodeKind::ProductClass),
            Intent::Match => Some(NodeKind::ProcessClass),
            Intent::Lookup | Intent::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentParse {
    pub intent: Intent,
    #[serde(default)]
    pub slot: Option<Iri>,
    /// Run count for the schedule intent.
    #[serde(default)]
    pub n: Option<usize>,
}

impl IntentParse {
    pub fn unknown() -> Self {
        IntentParse {
            intent: Intent::Unknown,
            slot: None,
            n: None,
        }
    }
}

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

fn candidate_tokens(graph: &AkgGraph, iri: &Iri) -> BTreeSet<String> {
    let mut set: BTreeSet<String> = graph.node(iri).map(|n| tokens(&n.label).collect()).unwrap_or_default();
    set.insert(iri.local_name().to_lowercase());
    set
}

/// Keyword classification plus token-overlap slot filling.
///
/// A leading "why" is a diagnosis, "schedule" a scheduling request (run count
/// is the first integer, default 1), "which resource" or "who can" a match
/// query, anything else a lookup. The slot is the candidate node whose label
/// tokens and lowercased local name overlap the question most, ties to the
/// smaller IRI. No overlap yields [`Intent::Unknown`].
pub fn classify(question: &str, graph: &AkgGraph) -> IntentParse {
    let lower = question.trim().to_lowercase();
    let words: Vec<String> = tokens(&lower).collect();
    let intent = if words.first().is_some_and(|w| w == "why") {
        Intent::Diagnose
    } else if lower.contains("schedule") {
        Intent::Schedule
    } else if lower.contains("which resource") || lower.contains("who can") {
        Intent::Match
    } else {
        Intent::Lookup
    };
    let question_tokens: BTreeSet<&str> = words.iter().map(String::as_str).collect();
    let mut best: Option<(usize, &Iri)> = None;
    for (iri, node) in graph.nodes() {
        if intent.slot_kind().is_some_and(|k| k != node.kind) {
            continue;
        }
        let overlap = candidate_tokens(graph, iri)
            .iter()
            .filter(|t| question_tokens.contains(t.as_str()))
            .count();
        // nodes iterate in IRI order, so strict `>` keeps the smaller IRI on ties
        if overlap > 0 && best.is_none_or(|(b, _)| overlap > b) {
            best = Some((overlap, iri));
        }
    }
    let Some((_, slot)) = best else {
        return IntentParse::unknown();
    };
    let n = (intent == Intent::Schedule)
        .then(|| words.iter().find_map(|w| w.parse::<usize>().ok()).unwrap_or(1));
    IntentParse {
        intent,
        slot: Some(slot.clone()),
        n,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDetail {
    pub iri: Iri,
    pub kind: NodeKind,
    pub label: String,
    pub attrs: std::collections::BTreeMap<String, AttrValue>,
    pub outgoing: Vec<Edge>,
    pub incoming: Vec<Edge>,
}

/// A node with all edges touching it, each list in predicate then IRI order.
pub fn node_detail(graph: &AkgGraph, iri: &Iri) -> Result<NodeDetail, GraphError> {
    let node = graph.try_node(iri)?;
    let mut outgoing = Vec::new();
    let mut incoming = Vec::new();
    for kind in EdgeKind::ALL {
        outgoing.extend(graph.adjacent(iri, kind, Direction::Out).map(|o| Edge::new(iri.clone(), kind, o.clone())));
        incoming.extend(graph.adjacent(iri, kind, Direction::In).map(|s| Edge::new(s.clone(), kind, iri.clone())));
    }
    Ok(NodeDetail {
        iri: iri.clone(),
        kind: node.kind,
        label: node.label.clone(),
        attrs: node.attrs.clone(),
        outgoing,
        incoming,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Structured {
    Diagnosis(DiagnosisReport),
    Schedule(Schedule),
    Match(MatchReport),
    Lookup(NodeDetail),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlAnswer {
    pub intent: Intent,
    pub slot: Option<Iri>,
    pub answer_text: String,
    pub structured: Option<Structured>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("intent {0:?} needs a slot")]
    MissingSlot(Intent),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Diagnosis(#[from] DiagnosisError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Previews a schedule of `n` fresh runs of `product` without touching `graph`.
pub fn preview_schedule(
    graph: &AkgGraph,
    product: &Iri,
    n: usize,
    policy: &SchedulePolicy,
) -> Result<Schedule, NlError> {
    let mut scratch = graph.clone();
    let runs = instantiate_run_at(&mut scratch, product, n, 0)?;
    let instance = build_instance(&scratch, &runs)?;
    Ok(schedule(&instance, policy)?)
}

pub const GUIDANCE: &str = "I could not relate the question to the knowledge graph. Try \"Why did <condition>?\", \
\"Schedule <n> runs of <product>\", \"Which resource can <process>?\" or name a node.";

fn label_of(graph: &AkgGraph, iri: &Iri) -> String {
    match graph.node(iri) {
        Some(n) if !n.label.is_empty() => n.label.clone(),
        _ => iri.local_name().to_string(),
    }
}

/// Executes the engine operation for `parse` and renders the answer.
pub fn answer(graph: &AkgGraph, parse: &IntentParse) -> Result<NlAnswer, NlError> {
    let slot = match (parse.intent, &parse.slot) {
        (Intent::Unknown, _) => {
            return Ok(NlAnswer {
                intent: Intent::Unknown,
                slot: None,
                answer_text: GUIDANCE.to_string(),
                structured: None,
            })
        }
        (intent, None) => return Err(NlError::MissingSlot(intent)),
        (_, Some(s)) => s,
    };
    if let Some(kind) = parse.intent.slot_kind() {
        graph.expect_kind(slot, &[kind])?;
    }
    let name = label_of(graph, slot);
    let (text, structured) = match parse.intent {
        Intent::Diagnose => {
            let report = plausible_causes(graph, &ObservationContext::new(slot.clone()))?;
            let text = if report.causes.is_empty() {
                format!("No plausible causes are recorded for \"{name}\".")
            } else {
                let items: Vec<String> = report
                    .causes
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let scope = match c.scope {
                            CauseScope::Global => "global".to_string(),
                            CauseScope::ResourceSpecific => {
                                let rs: Vec<String> = c.evidence[1..].iter().map(|e| label_of(graph, &e.subject)).collect();
                                format!("specific to {}", rs.join(", "))
                            }
                        };
                        format!("{}. {} ({scope}, weight {})", i + 1, label_of(graph, &c.cause), c.weight)
                    })
                    .collect();
                format!("Plausible causes for \"{name}\": {}", items.join("; "))
            };
            (text, Structured::Diagnosis(report))
        }
        Intent::Schedule => {
            let n = parse.n.unwrap_or(1);
            let s = preview_schedule(graph, slot, n, &SchedulePolicy::default())?;
            let text = format!(
                "Scheduled {n} run(s) of \"{name}\": {} steps, makespan {} s.",
                s.assignments.len(),
                s.makespan_s
            );
            (text, Structured::Schedule(s))
        }
        Intent::Match => {
            let report = eligible_resources(graph, slot)?;
            let text = if report.eligible.is_empty() {
                format!("No resource can currently execute \"{name}\".")
            } else {
                let rs: Vec<String> = report.eligible.iter().map(|r| label_of(graph, r)).collect();
                format!("\"{name}\" can be executed by: {}.", rs.join(", "))
            };
            (text, Structured::Match(report))
        }
        Intent::Lookup => {
            let detail = node_detail(graph, slot)?;
            let text = format!(
                "\"{name}\" is a {} with {} outgoing and {} incoming relations.",
                detail.kind.name(),
                detail.outgoing.len(),
                detail.incoming.len()
            );
            (text, Structured::Lookup(detail))
        }
        Intent::Unknown => unreachable!("handled above"),
    };
    Ok(NlAnswer {
        intent: parse.intent,
        slot: Some(slot.clone()),
        answer_text: text,
        structured: Some(structured),
    })
}

/// Classifies with the deterministic backend and answers.
pub fn ask(graph: &AkgGraph, question: &str) -> Result<NlAnswer, NlError> {
    if question.trim().is_empty() {
        return Err(NlError::EmptyQuestion);
    }
    answer(graph, &classify(question, graph))
}
