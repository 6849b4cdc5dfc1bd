use std::sync::Arc;
use std::time::{Duration, Instant};

use akg_core::fixtures::demo;
use akg_service::{AppState, Backend};
use akg_testkit::oracle::export_violations;
use serde_json::{json, Value};

async fn spawn() -> String {
    let state = Arc::new(AppState::new(demo(), Backend::Deterministic));
    let (listener, addr) = akg_service::bind("127.0.0.1:0").await.unwrap();
    tokio::spawn(akg_service::serve_on(listener, state));
    format!("http://{addr}")
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn readers_see_typed_graphs_and_writer_versions_increase() {
    let base = spawn().await;
    let deadline = Instant::now() + Duration::from_secs(2);

    let mut readers = Vec::new();
    for _ in 0..4 {
        let base = base.clone();
        readers.push(tokio::spawn(async move {
            let http = reqwest::Client::new();
            let mut last = 0;
            let mut reads = 0;
            while Instant::now() < deadline {
                let v: Value = http.get(format!("{base}/api/graph")).send().await.unwrap().json().await.unwrap();
                let version = v["graph_version"].as_u64().unwrap();
                assert!(version >= last, "reader saw version go back from {last} to {version}");
                last = version;
                let violations = export_violations(&v["data"]);
                assert!(violations.is_empty(), "{violations:?}");
                reads += 1;
            }
            reads
        }));
    }

    let http = reqwest::Client::new();
    let mut last = 0;
    let mut writes = 0;
    let mut remove = true;
    while Instant::now() < deadline {
        let action = if remove { "remove" } else { "add" };
        remove = !remove;
        let v: Value = http
            .post(format!("{base}/api/resources/ex:Robot2/capability"))
            .body(json!({"capability": "ex:Robot2Screwdriver", "action": action}).to_string())
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        assert_eq!(v["ok"], json!(true), "{v}");
        let version = v["graph_version"].as_u64().unwrap();
        assert!(version > last);
        last = version;
        writes += 1;
    }
    for r in readers {
        assert!(r.await.unwrap() > 0);
    }
    assert!(writes > 10);
}
