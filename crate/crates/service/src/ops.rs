//! Request types and graph operations shared by the HTTP handlers and the CLI.
//!
//! Each function returns the exact value the service places in the envelope's
//! `data` field, so CLI `--json` output and HTTP payloads serialize identically.

use akg_core::diagnosis::{condition_catalog, plausible_causes, ConditionEntry, DiagnosisError, ObservationContext};
use akg_core::matchmaker::{apply_capability_change, eligible_resources, CapabilityAction, MatchError};
use akg_core::nl::{node_detail, preview_schedule, NlError, NodeDetail};
use akg_core::run::{list_runs, load_run};
use akg_core::scheduler::{build_instance, commit_schedule, schedule, ScheduleError, SchedulePolicy};
use akg_core::{
    instantiate_run, AkgGraph, DiagnosisReport, GraphError, ImpactReport, Iri, IriError, MatchReport, ProcessRun,
    RunError, Schedule, Violation,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

fn resolve(graph: &AkgGraph, input: &str) -> Result<Iri, ApiError> {
    graph.resolve(input).map_err(|e: IriError| ApiError::bad_request(format!("`{input}`: {e}")))
}

fn resolve_opt(graph: &AkgGraph, input: &Option<String>) -> Result<Option<Iri>, ApiError> {
    input.as_deref().map(|s| resolve(graph, s)).transpose()
}

pub fn validate(graph: &AkgGraph) -> Vec<Violation> {
    akg_core::validate(graph)
}

pub fn eligible(graph: &AkgGraph, process: &str) -> Result<MatchReport, ApiError> {
    Ok(eligible_resources(graph, &resolve(graph, process)?)?)
}

pub fn node(graph: &AkgGraph, iri: &str) -> Result<NodeDetail, ApiError> {
    Ok(node_detail(graph, &resolve(graph, iri)?)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunsRequest {
    pub product: String,
    #[serde(default = "one")]
    pub n: usize,
}

fn one() -> usize {
    1
}

pub fn create_runs(graph: &mut AkgGraph, req: &RunsRequest) -> Result<Vec<ProcessRun>, ApiError> {
    let product = resolve(graph, &req.product)?;
    Ok(instantiate_run(graph, &product, req.n)?)
}

pub fn runs(graph: &AkgGraph) -> Vec<ProcessRun> {
    list_runs(graph)
}

/// Either existing runs by id, or a preview of `n` fresh runs of `product`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScheduleRequest {
    #[serde(default)]
    pub run_ids: Vec<String>,
    #[serde(default)]
    pub product: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub policy: SchedulePolicy,
}

pub fn schedule_runs(graph: &AkgGraph, req: &ScheduleRequest) -> Result<Schedule, ApiError> {
    match (&req.product, req.run_ids.is_empty()) {
        (Some(p), true) => {
            let product = resolve(graph, p)?;
            Ok(preview_schedule(graph, &product, req.n.unwrap_or(1), &req.policy)?)
        }
        (None, false) => {
            let runs = req
                .run_ids
                .iter()
                .map(|id| Ok(load_run(graph, &resolve(graph, id)?)?))
                .collect::<Result<Vec<_>, ApiError>>()?;
            let instance = build_instance(graph, &runs)?;
            Ok(schedule(&instance, &req.policy)?)
        }
        _ => Err(ApiError::bad_request("give either `run_ids` or `product`")),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommitResult {
    pub committed: usize,
}

pub fn commit(graph: &mut AkgGraph, schedule: &Schedule) -> Result<CommitResult, ApiError> {
    commit_schedule(graph, schedule)?;
    Ok(CommitResult {
        committed: schedule.assignments.len(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapabilityRequest {
    pub capability: String,
    pub action: CapabilityAction,
}

pub fn capability_change(graph: &mut AkgGraph, resource: &str, req: &CapabilityRequest) -> Result<ImpactReport, ApiError> {
    let resource = resolve(graph, resource)?;
    let capability = resolve(graph, &req.capability)?;
    Ok(apply_capability_change(graph, &resource, &capability, req.action)?)
}

pub fn conditions(graph: &AkgGraph, asset: Option<&str>) -> Result<Vec<ConditionEntry>, ApiError> {
    let asset = asset.map(|a| resolve(graph, a)).transpose()?;
    Ok(condition_catalog(graph, asset.as_ref())?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnoseRequest {
    pub condition: String,
    #[serde(default)]
    pub affected_step: Option<String>,
    #[serde(default)]
    pub observed_on_resource: Option<String>,
}

pub fn diagnose(graph: &AkgGraph, req: &DiagnoseRequest) -> Result<DiagnosisReport, ApiError> {
    let ctx = ObservationContext {
        condition: resolve(graph, &req.condition)?,
        affected_step: resolve_opt(graph, &req.affected_step)?,
        observed_on_resource: resolve_opt(graph, &req.observed_on_resource)?,
    };
    Ok(plausible_causes(graph, &ctx)?)
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let code = match &e {
            GraphError::UnknownNode(_) => "unknown_node",
            GraphError::DuplicateIri(_) => "duplicate_iri",
            GraphError::InvalidAttr { .. } => "invalid_attr",
            GraphError::TypeViolation { .. } => "type_violation",
            GraphError::CycleIntroduced(_) => "cycle_introduced",
            GraphError::MissingEdge(_) => "missing_edge",
            GraphError::KindMismatch { .. } => "kind_mismatch",
        };
        let status = match &e {
            GraphError::UnknownNode(_) | GraphError::MissingEdge(_) => 404,
            GraphError::DuplicateIri(_) | GraphError::CycleIntroduced(_) => 409,
            _ => 422,
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<MatchError> for ApiError {
    fn from(e: MatchError) -> Self {
        match e {
            MatchError::Graph(g) => g.into(),
            MatchError::NotAProcess(_) => ApiError::new(422, "not_a_process", e.to_string()),
            MatchError::TypeMismatch { .. } => ApiError::new(422, "type_mismatch", e.to_string()),
        }
    }
}

impl From<RunError> for ApiError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Graph(g) => g.into(),
            RunError::UnknownRun(_) => ApiError::new(404, "unknown_run", e.to_string()),
            RunError::ZeroRuns => ApiError::bad_request(e.to_string()),
            RunError::NotAProductClass(_) => ApiError::new(422, "not_a_product_class", e.to_string()),
            RunError::EmptyProcessDefinition(_) | RunError::CyclicProcessDefinition(_) => {
                ApiError::new(422, "invalid_process_definition", e.to_string())
            }
        }
    }
}

impl From<ScheduleError> for ApiError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::Graph(g) => g.into(),
            ScheduleError::Match(m) => m.into(),
            ScheduleError::StarvedStep(_) => ApiError::new(422, "starved_step", e.to_string()),
            ScheduleError::StaleSchedule { .. } => ApiError::new(409, "stale_schedule", e.to_string()),
            ScheduleError::InstanceTooLarge { .. } => ApiError::new(422, "instance_too_large", e.to_string()),
            ScheduleError::InvalidInstance(_) | ScheduleError::Infeasible(_) => {
                ApiError::new(422, "invalid_schedule", e.to_string())
            }
        }
    }
}

impl From<DiagnosisError> for ApiError {
    fn from(e: DiagnosisError) -> Self {
        match e {
            DiagnosisError::Graph(g) => g.into(),
            DiagnosisError::Match(m) => m.into(),
        }
    }
}

impl From<NlError> for ApiError {
    fn from(e: NlError) -> Self {
        match e {
            NlError::EmptyQuestion => ApiError::new(400, "empty_question", e.to_string()),
            NlError::MissingSlot(_) => ApiError::new(422, "missing_slot", e.to_string()),
            NlError::Graph(g) => g.into(),
            NlError::Diagnosis(d) => d.into(),
            NlError::Match(m) => m.into(),
            NlError::Run(r) => r.into(),
            NlError::Schedule(s) => s.into(),
        }
    }
}
