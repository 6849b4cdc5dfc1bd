use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use akg_core::fixtures::demo;
use akg_service::{AppState, Backend, ErrorBody, RemoteBackend};
use axum::http::HeaderMap;
use axum::routing::post;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::value::RawValue;
use serde_json::{json, Value};

#[derive(Debug, Deserialize)]
struct Raw {
    ok: bool,
    data: Option<Box<RawValue>>,
    errors: Vec<ErrorBody>,
    graph_version: u64,
}

impl Raw {
    fn data(&self) -> Value {
        serde_json::from_str(self.data.as_ref().map(|d| d.get()).unwrap_or("null")).unwrap()
    }

    fn data_bytes(&self) -> &str {
        self.data.as_ref().expect("data present").get()
    }

    fn code(&self) -> &str {
        &self.errors[0].code
    }
}

#[derive(Deserialize)]
struct ChatRaw {
    intent: String,
    answer_text: String,
    structured: Option<Box<RawValue>>,
}

struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    async fn get(&self, path: &str) -> (u16, Raw) {
        let r = self.http.get(format!("{}{path}", self.base)).send().await.unwrap();
        let status = r.status().as_u16();
        (status, serde_json::from_str(&r.text().await.unwrap()).unwrap())
    }

    async fn post(&self, path: &str, body: impl Into<reqwest::Body>) -> (u16, Raw) {
        let r = self.http.post(format!("{}{path}", self.base)).body(body).send().await.unwrap();
        let status = r.status().as_u16();
        let text = r.text().await.unwrap();
        let raw: Raw = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
        assert_eq!(raw.ok, raw.errors.is_empty(), "ok xor errors: {text}");
        (status, raw)
    }

    async fn post_json(&self, path: &str, body: Value) -> (u16, Raw) {
        self.post(path, body.to_string()).await
    }

    async fn chat(&self, question: &str) -> (Raw, ChatRaw) {
        let (status, raw) = self.post_json("/api/chat", json!({ "question": question })).await;
        assert_eq!(status, 200, "{:?}", raw.errors);
        let chat: ChatRaw = serde_json::from_str(raw.data_bytes()).unwrap();
        (raw, chat)
    }
}

async fn spawn(backend: Backend) -> Client {
    let state = Arc::new(AppState::new(demo(), backend));
    let (listener, addr) = akg_service::bind("127.0.0.1:0").await.unwrap();
    tokio::spawn(akg_service::serve_on(listener, state));
    Client {
        base: format!("http://{addr}"),
        http: reqwest::Client::new(),
    }
}

fn enc(iri: &str) -> String {
    iri.replace(':', "%3A").replace('/', "%2F")
}

#[tokio::test]
async fn envelope_shape_and_unknown_route() {
    let c = spawn(Backend::Deterministic).await;
    let (status, raw) = c.get("/api/graph").await;
    assert_eq!(status, 200);
    assert!(raw.ok && raw.errors.is_empty());
    assert_eq!(raw.data()["nodes"].as_array().unwrap().len(), demo().node_count());

    let (status, raw) = c.get("/api/nope").await;
    assert_eq!(status, 404);
    assert!(!raw.ok);
    assert_eq!(raw.code(), "not_found");
    assert!(raw.data.is_none() || raw.data().is_null());
}

#[tokio::test]
async fn validate_and_eligible_on_demo() {
    let c = spawn(Backend::Deterministic).await;
    let (_, raw) = c.get("/api/validate").await;
    assert_eq!(raw.data(), json!([]));

    let (status, raw) = c.get(&format!("/api/processes/{}/eligible", enc("http://ex.org/Unscrew"))).await;
    assert_eq!(status, 200);
    assert_eq!(raw.data()["eligible"], json!(["http://ex.org/Robot2"]));

    let (status, raw) = c.get("/api/processes/ex:Unscrew/eligible").await;
    assert_eq!(status, 200, "prefixed names resolve against the graph prefixes");
    assert_eq!(raw.data()["eligible"], json!(["http://ex.org/Robot2"]));

    let (status, raw) = c.get("/api/processes/ex:Robot1/eligible").await;
    assert_eq!((status, raw.code()), (422, "not_a_process"));

    let (status, raw) = c.get("/api/processes/ex:Ghost/eligible").await;
    assert_eq!((status, raw.code()), (404, "unknown_node"));

    let (status, raw) = c.get("/api/processes/zz:Ghost/eligible").await;
    assert_eq!((status, raw.code()), (400, "invalid_request"));
}

#[tokio::test]
async fn capability_toggle_reports_starvation_and_restores() {
    let c = spawn(Backend::Deterministic).await;
    let (_, before) = c.get("/api/graph").await;
    let body = json!({"capability": "ex:Robot2Screwdriver", "action": "remove"});
    let (status, removed) = c.post_json("/api/resources/ex:Robot2/capability", body).await;
    assert_eq!(status, 200);
    assert!(removed.graph_version > before.graph_version);
    let changes = removed.data()["changes"].as_array().unwrap().clone();
    let unscrew = changes.iter().find(|e| e["process"] == "http://ex.org/Unscrew").unwrap();
    assert_eq!(unscrew["starved"], json!(true));

    let (status, again) = c.post_json("/api/resources/ex:Robot2/capability", json!({"capability": "ex:Robot2Screwdriver", "action": "remove"})).await;
    assert_eq!((status, again.code()), (404, "missing_edge"));
    assert_eq!(again.graph_version, removed.graph_version, "failed mutations do not bump the version");

    let (_, added) = c.post_json("/api/resources/ex:Robot2/capability", json!({"capability": "ex:Robot2Screwdriver", "action": "add"})).await;
    assert!(added.graph_version > removed.graph_version);
    let (_, eligible) = c.get("/api/processes/ex:Unscrew/eligible").await;
    assert_eq!(eligible.data()["eligible"], json!(["http://ex.org/Robot2"]));

    let (status, bad) = c.post("/api/resources/ex:Robot2/capability", "{").await;
    assert_eq!((status, bad.code()), (400, "invalid_request"));
}

#[tokio::test]
async fn runs_schedule_commit_and_staleness() {
    let c = spawn(Backend::Deterministic).await;
    let (status, runs) = c.post_json("/api/runs", json!({"product": "ex:BatteryPack", "n": 2})).await;
    assert_eq!(status, 200, "{:?}", runs.errors);
    let run_ids: Vec<String> = runs.data().as_array().unwrap().iter().map(|r| r["run_id"].as_str().unwrap().to_string()).collect();
    assert_eq!(run_ids.len(), 2);

    let (_, listed) = c.get("/api/runs").await;
    assert_eq!(listed.data().as_array().unwrap().len(), 2);

    let (status, sched) = c.post_json("/api/schedule", json!({"run_ids": run_ids, "policy": {"improve": true}})).await;
    assert_eq!(status, 200, "{:?}", sched.errors);
    let schedule = sched.data();
    assert_eq!(schedule["assignments"].as_array().unwrap().len(), 10);

    let (status, committed) = c.post("/api/schedule/commit", schedule.to_string()).await;
    assert_eq!(status, 200, "{:?}", committed.errors);
    assert_eq!(committed.data()["committed"], json!(10));
    assert!(committed.graph_version > sched.graph_version);

    let (status, _) = c.post("/api/schedule/commit", schedule.to_string()).await;
    assert_eq!(status, 200, "recommitting the same schedule is allowed");

    c.post_json("/api/resources/ex:AGV2/capability", json!({"capability": "ex:AGV2Carrier", "action": "remove"})).await;
    let (status, stale) = c.post("/api/schedule/commit", schedule.to_string()).await;
    assert_eq!((status, stale.code()), (409, "stale_schedule"));

    let (status, both) = c.post_json("/api/schedule", json!({})).await;
    assert_eq!((status, both.code()), (400, "invalid_request"));
}

#[tokio::test]
async fn conditions_and_diagnosis() {
    let c = spawn(Backend::Deterministic).await;
    let (_, all) = c.get("/api/conditions").await;
    assert_eq!(all.data().as_array().unwrap().len(), 3);
    let (_, agv) = c.get("/api/conditions?asset=ex:AGV1").await;
    let agv = agv.data();
    assert_eq!(agv.as_array().unwrap().len(), 1);
    assert_eq!(agv[0]["condition"], "http://ex.org/BatteryLate");

    let (_, report) = c.post_json("/api/diagnose", json!({"condition": "ex:BatteryLate"})).await;
    let causes: Vec<String> = report.data()["causes"].as_array().unwrap().iter().map(|c| c["cause"].as_str().unwrap().to_string()).collect();
    assert_eq!(causes, ["http://ex.org/AgvBatteryLow", "http://ex.org/AgvRouteBlocked", "http://ex.org/UpstreamDelay"]);

    let (_, scoped) = c.post_json("/api/diagnose", json!({"condition": "ex:BatteryLate", "observed_on_resource": "ex:AGV2"})).await;
    let causes: Vec<Value> = scoped.data()["causes"].as_array().unwrap().iter().map(|c| c["cause"].clone()).collect();
    assert_eq!(causes, [json!("http://ex.org/AgvRouteBlocked"), json!("http://ex.org/UpstreamDelay")]);

    let (status, wrong) = c.post_json("/api/diagnose", json!({"condition": "ex:Robot1"})).await;
    assert_eq!((status, wrong.code()), (422, "kind_mismatch"));
}

#[tokio::test]
async fn chat_payloads_equal_direct_endpoints() {
    let c = spawn(Backend::Deterministic).await;

    let (chat_raw, chat) = c.chat("Why did the battery not arrive in time").await;
    let (_, direct) = c.post_json("/api/diagnose", json!({"condition": "http://ex.org/BatteryLate"})).await;
    assert_eq!(chat.intent, "diagnose");
    assert_eq!(chat_raw.graph_version, direct.graph_version);
    assert_eq!(chat.structured.unwrap().get(), direct.data_bytes());
    assert!(chat.answer_text.contains("AGV"), "{}", chat.answer_text);

    let (_, chat) = c.chat("schedule 3 runs of CellModule").await;
    let (_, direct) = c.post_json("/api/schedule", json!({"product": "http://ex.org/CellModule", "n": 3})).await;
    assert_eq!(chat.intent, "schedule");
    assert_eq!(chat.structured.unwrap().get(), direct.data_bytes());

    let (_, chat) = c.chat("Which resource can unscrew the module?").await;
    let (_, direct) = c.get("/api/processes/ex:Unscrew/eligible").await;
    assert_eq!(chat.intent, "match");
    assert_eq!(chat.structured.unwrap().get(), direct.data_bytes());

    let (_, chat) = c.chat("tell me about robot2").await;
    let (_, direct) = c.get("/api/nodes/ex:Robot2").await;
    assert_eq!(chat.intent, "lookup");
    assert_eq!(chat.structured.unwrap().get(), direct.data_bytes());

    let (_, chat) = c.chat("hello there").await;
    assert_eq!(chat.intent, "unknown");
    assert!(chat.structured.is_none());

    let (status, empty) = c.post_json("/api/chat", json!({"question": "   "})).await;
    assert_eq!((status, empty.code()), (400, "empty_question"));
}

#[tokio::test]
async fn turtle_ingest_replaces_graph() {
    let c = spawn(Backend::Deterministic).await;
    let (_, before) = c.get("/api/graph").await;

    let (status, bad) = c.post("/api/graph/ttl", "@prefix ex: <http://ex.org/> .\nex:A a ppr:Nope").await;
    assert_eq!((status, bad.code()), (400, "parse_error"));
    let errors = bad.data();
    assert!(errors[0]["line"].as_u64().unwrap() >= 1);
    assert_eq!(bad.graph_version, before.graph_version);

    let (_, ttl) = c.get("/api/graph/ttl").await;
    let text: String = serde_json::from_str(ttl.data_bytes()).unwrap();
    let (status, loaded) = c.post("/api/graph/ttl", text).await;
    assert_eq!(status, 200, "{:?}", loaded.errors);
    assert!(loaded.graph_version > before.graph_version);
    assert_eq!(loaded.data()["nodes"], json!(demo().node_count()));

    let (_, tiny) = c.post("/api/graph/ttl", "@prefix ex: <http://ex.org/> .\nex:P a ppr:ProductClass .").await;
    assert!(tiny.graph_version > loaded.graph_version);
    let (_, g) = c.get("/api/graph").await;
    assert_eq!(g.data()["nodes"].as_array().unwrap().len(), 1);
}

#[derive(Clone)]
struct Mock {
    reply: Value,
    status: u16,
    calls: Arc<AtomicUsize>,
    auth: Arc<std::sync::Mutex<Option<String>>>,
}

async fn spawn_mock(reply: Value, status: u16) -> (String, Mock) {
    let mock = Mock {
        reply,
        status,
        calls: Arc::default(),
        auth: Arc::default(),
    };
    let m = mock.clone();
    let app = Router::new().route(
        "/v1/chat/completions",
        post(move |headers: HeaderMap, Json(req): Json<Value>| {
            let m = m.clone();
            async move {
                m.calls.fetch_add(1, Ordering::SeqCst);
                *m.auth.lock().unwrap() = headers.get("authorization").map(|v| v.to_str().unwrap().to_string());
                assert_eq!(req["model"], "test-model");
                assert_eq!(req["messages"][1]["role"], "user");
                let content = m.reply.to_string();
                let body = json!({"choices": [{"message": {"role": "assistant", "content": content}}]});
                (axum::http::StatusCode::from_u16(m.status).unwrap(), Json(body))
            }
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1"), mock)
}

#[tokio::test]
async fn remote_backend_only_chooses_intent_and_slot() {
    let (url, mock) = spawn_mock(json!({"intent": "diagnose", "slot": "ex:BatteryLate"}), 200).await;
    let backend = Backend::Remote(RemoteBackend::new(url, "test-model", Some("k3y".into()), false));
    let c = spawn(backend).await;
    let (_, chat) = c.chat("what went wrong with the delivery?").await;
    let (_, direct) = c.post_json("/api/diagnose", json!({"condition": "ex:BatteryLate"})).await;
    assert_eq!(chat.intent, "diagnose");
    assert_eq!(chat.structured.unwrap().get(), direct.data_bytes());
    assert_eq!(mock.calls.load(Ordering::SeqCst), 1);
    assert_eq!(mock.auth.lock().unwrap().as_deref(), Some("Bearer k3y"));
}

#[tokio::test]
async fn remote_backend_ungrounded_slot_is_unknown() {
    for reply in [
        json!({"intent": "diagnose", "slot": "ex:NoSuchThing"}),
        json!({"intent": "schedule", "slot": "ex:BatteryLate"}),
        json!({"intent": "dance"}),
    ] {
        let (url, _) = spawn_mock(reply, 200).await;
        let c = spawn(Backend::Remote(RemoteBackend::new(url, "test-model", None, false))).await;
        let (_, chat) = c.chat("why did the battery not arrive in time").await;
        assert_eq!(chat.intent, "unknown");
        assert!(chat.structured.is_none());
    }
}

#[tokio::test]
async fn remote_backend_failure_and_fallback() {
    let (url, _) = spawn_mock(json!({}), 500).await;
    let c = spawn(Backend::Remote(RemoteBackend::new(url.clone(), "test-model", None, false))).await;
    let (status, raw) = c.post_json("/api/chat", json!({"question": "why did the battery not arrive in time"})).await;
    assert_eq!((status, raw.code()), (503, "backend_unavailable"));

    let c = spawn(Backend::Remote(RemoteBackend::new(url, "test-model", None, true))).await;
    let (_, chat) = c.chat("why did the battery not arrive in time").await;
    assert_eq!(chat.intent, "diagnose");

    let c = spawn(Backend::Remote(RemoteBackend::new("http://127.0.0.1:9", "test-model", None, false))).await;
    let (status, raw) = c.post_json("/api/chat", json!({"question": "why?"})).await;
    assert_eq!((status, raw.code()), (503, "backend_unavailable"));
}
