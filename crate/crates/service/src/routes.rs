use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use akg_core::{load_turtle, serialize_turtle, Schedule};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ErrorBody};
use crate::ops;
use crate::state::AppState;

type Shared = State<Arc<AppState>>;

/// Response wrapper shared by every endpoint. `ok` holds iff `errors` is empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApiEnvelope<T> {
    pub ok: bool,
    pub data: Option<T>,
    pub errors: Vec<ErrorBody>,
    pub graph_version: u64,
}

fn json_response(status: u16, body: String) -> Response {
    let status = StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn envelope<T: Serialize>(result: Result<T, ApiError>, graph_version: u64) -> Response {
    match result {
        Ok(data) => {
            let body = ApiEnvelope {
                ok: true,
                data: Some(data),
                errors: vec![],
                graph_version,
            };
            match serde_json::to_string(&body) {
                Ok(s) => json_response(200, s),
                Err(e) => failure(ApiError::new(500, "internal", e.to_string()), graph_version),
            }
        }
        Err(e) => failure(e, graph_version),
    }
}

fn failure(e: ApiError, graph_version: u64) -> Response {
    failure_with(e, None::<()>, graph_version)
}

fn failure_with<T: Serialize>(e: ApiError, data: Option<T>, graph_version: u64) -> Response {
    let body = ApiEnvelope {
        ok: false,
        data,
        errors: vec![e.body()],
        graph_version,
    };
    json_response(e.status, serde_json::to_string(&body).expect("error envelopes serialize"))
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

fn path_arg(path: Result<Path<String>, PathRejection>) -> Result<String, ApiError> {
    path.map(|Path(p)| p).map_err(|e| ApiError::bad_request(e.body_text()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/graph", get(get_graph))
        .route("/api/graph/ttl", get(get_ttl).post(post_ttl))
        .route("/api/validate", get(get_validate))
        .route("/api/nodes/{iri}", get(get_node))
        .route("/api/processes/{iri}/eligible", get(get_eligible))
        .route("/api/runs", get(get_runs).post(post_runs))
        .route("/api/schedule", post(post_schedule))
        .route("/api/schedule/commit", post(post_commit))
        .route("/api/resources/{iri}/capability", post(post_capability))
        .route("/api/conditions", get(get_conditions))
        .route("/api/diagnose", post(post_diagnose))
        .route("/api/chat", post(post_chat))
        .fallback(not_found)
        .with_state(state)
}

async fn not_found(State(state): Shared) -> Response {
    failure(ApiError::new(404, "not_found", "no such endpoint"), state.snapshot().version())
}

async fn get_graph(State(state): Shared) -> Response {
    let g = state.snapshot();
    envelope(Ok(g.export()), g.version())
}

async fn get_ttl(State(state): Shared) -> Response {
    let g = state.snapshot();
    envelope(Ok(serialize_turtle(&g)), g.version())
}

#[derive(Serialize)]
struct Loaded {
    nodes: usize,
    edges: usize,
}

async fn post_ttl(State(state): Shared, body: Bytes) -> Response {
    let text = match std::str::from_utf8(&body) {
        Ok(t) => t,
        Err(e) => return failure(ApiError::new(400, "parse_error", e.to_string()), state.snapshot().version()),
    };
    match load_turtle(text) {
        Ok(graph) => {
            let loaded = Loaded {
                nodes: graph.node_count(),
                edges: graph.edge_count(),
            };
            let version = state.replace(graph);
            envelope(Ok(loaded), version)
        }
        Err(errors) => {
            let message = errors.first().map(ToString::to_string).unwrap_or_default();
            failure_with(ApiError::new(400, "parse_error", message), Some(errors), state.snapshot().version())
        }
    }
}

async fn get_validate(State(state): Shared) -> Response {
    let g = state.snapshot();
    envelope(Ok(ops::validate(&g)), g.version())
}

async fn get_node(State(state): Shared, path: Result<Path<String>, PathRejection>) -> Response {
    let g = state.snapshot();
    envelope(path_arg(path).and_then(|iri| ops::node(&g, &iri)), g.version())
}

async fn get_eligible(State(state): Shared, path: Result<Path<String>, PathRejection>) -> Response {
    let g = state.snapshot();
    envelope(path_arg(path).and_then(|iri| ops::eligible(&g, &iri)), g.version())
}

async fn get_runs(State(state): Shared) -> Response {
    let g = state.snapshot();
    envelope(Ok(ops::runs(&g)), g.version())
}

async fn post_runs(State(state): Shared, body: Bytes) -> Response {
    let (result, version) = match parse_body::<ops::RunsRequest>(&body) {
        Ok(req) => state.mutate(|g| ops::create_runs(g, &req)),
        Err(e) => (Err(e), state.snapshot().version()),
    };
    envelope(result, version)
}

async fn post_schedule(State(state): Shared, body: Bytes) -> Response {
    let g = state.snapshot();
    envelope(parse_body(&body).and_then(|req| ops::schedule_runs(&g, &req)), g.version())
}

async fn post_commit(State(state): Shared, body: Bytes) -> Response {
    let (result, version) = match parse_body::<Schedule>(&body) {
        Ok(schedule) => state.mutate(|g| ops::commit(g, &schedule)),
        Err(e) => (Err(e), state.snapshot().version()),
    };
    envelope(result, version)
}

async fn post_capability(State(state): Shared, path: Result<Path<String>, PathRejection>, body: Bytes) -> Response {
    let parsed = path_arg(path).and_then(|iri| Ok((iri, parse_body::<ops::CapabilityRequest>(&body)?)));
    let (result, version) = match parsed {
        Ok((resource, req)) => state.mutate(|g| ops::capability_change(g, &resource, &req)),
        Err(e) => (Err(e), state.snapshot().version()),
    };
    envelope(result, version)
}

#[derive(Deserialize)]
struct ConditionsQuery {
    asset: Option<String>,
}

async fn get_conditions(State(state): Shared, query: Result<Query<ConditionsQuery>, QueryRejection>) -> Response {
    let g = state.snapshot();
    let result = query
        .map_err(|e| ApiError::bad_request(e.body_text()))
        .and_then(|Query(q)| ops::conditions(&g, q.asset.as_deref().filter(|a| !a.is_empty())));
    envelope(result, g.version())
}

async fn post_diagnose(State(state): Shared, body: Bytes) -> Response {
    let g = state.snapshot();
    envelope(parse_body(&body).and_then(|req| ops::diagnose(&g, &req)), g.version())
}

/// `session` is accepted and ignored; the bridge keeps no dialog state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NlQuery {
    pub question: String,
    #[serde(default)]
    pub session: Option<String>,
}

async fn post_chat(State(state): Shared, body: Bytes) -> Response {
    let g = state.snapshot();
    let query: NlQuery = match parse_body(&body) {
        Ok(q) => q,
        Err(e) => return failure(e, g.version()),
    };
    if query.question.trim().is_empty() {
        return failure(ApiError::from(akg_core::nl::NlError::EmptyQuestion), g.version());
    }
    let result = match state.backend.classify(&query.question, &g).await {
        Ok(parse) => akg_core::nl::answer(&g, &parse).map_err(ApiError::from),
        Err(e) => Err(e),
    };
    envelope(result, g.version())
}
