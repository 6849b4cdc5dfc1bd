//! Product-process-resource asset knowledge graph engine.
//!
//! The graph ([`AkgGraph`]) holds class-level products, processes and
//! required capabilities, instance-level resources with their provided
//! capabilities, and undesired conditions with resource-scoped or global
//! plausible causes. On top of it sit Turtle I/O ([`ttl`]), rule-based
//! validation ([`validate`]), capability matchmaking ([`matchmaker`]),
//! makespan scheduling of production runs ([`scheduler`]), cause diagnosis
//! ([`diagnosis`]) and a deterministic natural-language intent router ([`nl`]).

pub mod attr;
pub mod constraint;
pub mod diagnosis;
pub mod fixtures;
pub mod graph;
pub mod iri;
pub mod matchmaker;
pub mod nl;
pub mod run;
pub mod scheduler;
pub mod ttl;
pub mod validate;
pub mod vocab;

pub use attr::{AttrValue, Number};
pub use constraint::{Constraint, ConstraintOp};
pub use graph::{AkgGraph, CauseScope, Direction, Edge, EdgeKind, GraphError, Node, NodeKind};
pub use iri::{Iri, IriError, PrefixTable};
pub use run::{instantiate_run, instantiate_run_at, ProcessRun, RunError};
pub use ttl::{load_turtle, parse_turtle, serialize_turtle, ParseError};
pub use diagnosis::{condition_catalog, plausible_causes, DiagnosisReport, ObservationContext, RankedCause};
pub use matchmaker::{
    apply_capability_change, capability_matches, eligible_resources, CapabilityAction, ImpactReport, MatchError,
    MatchReport, ProvidedCapabilitySpec, RequiredCapabilitySpec,
};
pub use scheduler::{
    brute_force_schedule, build_instance, commit_schedule, schedule, verify_schedule, Schedule, ScheduleError,
    SchedulePolicy, SchedulingInstance,
};
pub use validate::{validate, RuleId, Severity, Violation};
