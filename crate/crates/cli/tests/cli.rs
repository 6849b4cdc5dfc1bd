use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

use akg_core::scheduler::{build_instance, schedule, SchedulePolicy};
use akg_core::{fixtures, instantiate_run_at, load_turtle, Iri, RuleId};
use akg_service::{AppState, Backend};
use serde_json::value::RawValue;
use serde_json::{json, Value};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ppr-akg")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn exit_codes_for_every_fixture() {
    let (code, stdout, _) = cli(&["validate", &fixture("demo.ttl")]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "0 violations");
    for rule in RuleId::ALL {
        let name = format!("bad_{}.ttl", rule.to_string().to_lowercase());
        let (code, stdout, stderr) = cli(&["validate", &fixture(&name)]);
        assert_eq!(code, 1, "{name}: {stderr}");
        assert!(stdout.starts_with(&format!("{rule} ")), "{name}: {stdout}");
        assert!(stdout.ends_with("1 violations\n"), "{name}: {stdout}");
    }
}

#[test]
fn io_parse_and_usage_failures() {
    let (code, _, stderr) = cli(&["validate", "/nonexistent/graph.ttl"]);
    assert_eq!(code, 3, "{stderr}");

    let dir = std::env::temp_dir().join(format!("ppr-akg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let broken = dir.join("broken.ttl");
    std::fs::write(&broken, "@prefix ex: <http://ex.org/> .\n\nex:A a ppr:ProductClass ;\n    rdfs:label \"unterminated .\n").unwrap();
    let (code, _, stderr) = cli(&["validate", broken.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(stderr.contains("broken.ttl:4:"), "line and column reported: {stderr}");

    for args in [&["frobnicate"][..], &["schedule", "x.ttl"], &["whatif", "x.ttl", "--resource", "a", "--capability", "b", "--action", "toggle"]] {
        assert_eq!(cli(args).0, 2, "{args:?}");
    }
    assert_eq!(cli(&["--help"]).0, 0);

    let (code, _, stderr) = cli(&["match", &fixture("demo.ttl"), "--step", "ex:Robot1"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("not_a_process"), "{stderr}");
    let (code, _, _) = cli(&["diagnose", &fixture("demo.ttl"), "--condition", "ex:Nope"]);
    assert_eq!(code, 1);
}

#[test]
fn schedule_json_equals_library_schedule() {
    let (code, stdout, stderr) = cli(&["schedule", &fixture("demo.ttl"), "--product", "ex:CellModule", "-n", "2", "--json"]);
    assert_eq!(code, 0, "{stderr}");
    let mut g = fixtures::demo();
    let runs = instantiate_run_at(&mut g, &Iri::new("http://ex.org/CellModule").unwrap(), 2, 0).unwrap();
    let expected = schedule(&build_instance(&g, &runs).unwrap(), &SchedulePolicy::default()).unwrap();
    assert_eq!(stdout, format!("{}\n", serde_json::to_string(&expected).unwrap()));

    let (_, improved, _) = cli(&["schedule", &fixture("demo.ttl"), "--product", "ex:CellModule", "-n", "2", "--improve", "--json"]);
    let improved: akg_core::Schedule = serde_json::from_str(&improved).unwrap();
    assert!(improved.makespan_s <= expected.makespan_s);
}

#[test]
fn export_canonicalizes() {
    let dir = std::env::temp_dir().join(format!("ppr-akg-export-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let once = dir.join("once.ttl");
    let twice = dir.join("twice.ttl");
    assert_eq!(cli(&["export", &fixture("demo.ttl"), "-o", once.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["export", once.to_str().unwrap(), "-o", twice.to_str().unwrap()]).0, 0);
    let a = std::fs::read_to_string(&once).unwrap();
    assert_eq!(a, std::fs::read_to_string(&twice).unwrap());
    assert_eq!(load_turtle(&a).unwrap(), fixtures::demo());

    assert_eq!(cli(&["export", &fixture("bad_v7.ttl"), "-o", once.to_str().unwrap()]).0, 0);
    assert_eq!(cli(&["export", &fixture("demo.ttl"), "-o", "/nonexistent/dir/out.ttl"]).0, 3);
}

#[test]
fn human_output_names_the_key_facts() {
    let demo = fixture("demo.ttl");
    let (_, out, _) = cli(&["diagnose", &demo, "--condition", "ex:BatteryLate", "--resource", "ex:AGV1"]);
    assert!(out.lines().nth(1).unwrap().contains("ex:AgvBatteryLow"), "{out}");
    assert!(!out.contains("AgvRouteBlocked"), "{out}");
    let (_, out, _) = cli(&["whatif", &demo, "--resource", "ex:Robot2", "--capability", "ex:Robot2Screwdriver", "--action", "remove"]);
    assert!(out.contains("ex:Unscrew: ex:Robot2 -> (none)  STARVED"), "{out}");
    let (_, out, _) = cli(&["match", &demo, "--step", "ex:Unscrew"]);
    assert!(out.starts_with("ex:Unscrew can run on: ex:Robot2\n"), "{out}");
}

#[derive(serde::Deserialize)]
struct Envelope {
    data: Box<RawValue>,
}

#[tokio::test(flavor = "multi_thread")]
async fn json_mode_is_byte_identical_to_service_payloads() {
    let demo = fixture("demo.ttl");
    let state = Arc::new(AppState::new(load_turtle(&std::fs::read_to_string(&demo).unwrap()).unwrap(), Backend::Deterministic));
    let (listener, addr) = akg_service::bind("127.0.0.1:0").await.unwrap();
    tokio::spawn(akg_service::serve_on(listener, state));
    let base = format!("http://{addr}");
    let http = reqwest::Client::new();

    let cases: Vec<(Vec<&str>, &str, String, Option<Value>)> = vec![
        (vec!["validate", &demo, "--json"], "GET", "/api/validate".into(), None),
        (vec!["match", &demo, "--step", "ex:Unscrew", "--json"], "GET", "/api/processes/ex:Unscrew/eligible".into(), None),
        (
            vec!["schedule", &demo, "--product", "ex:BatteryPack", "-n", "3", "--improve", "--json"],
            "POST",
            "/api/schedule".into(),
            Some(json!({"product": "ex:BatteryPack", "n": 3, "policy": {"improve": true}})),
        ),
        (
            vec!["diagnose", &demo, "--condition", "ex:BatteryLate", "--resource", "ex:AGV2", "--json"],
            "POST",
            "/api/diagnose".into(),
            Some(json!({"condition": "ex:BatteryLate", "observed_on_resource": "ex:AGV2"})),
        ),
        (
            vec!["whatif", &demo, "--resource", "ex:Robot2", "--capability", "ex:Robot2Screwdriver", "--action", "remove", "--json"],
            "POST",
            "/api/resources/ex:Robot2/capability".into(),
            Some(json!({"capability": "ex:Robot2Screwdriver", "action": "remove"})),
        ),
    ];
    for (args, method, path, body) in cases {
        let (code, stdout, stderr) = cli(&args);
        assert_eq!(code, 0, "{args:?}: {stderr}");
        let request = match method {
            "GET" => http.get(format!("{base}{path}")),
            _ => http.post(format!("{base}{path}")).body(body.unwrap().to_string()),
        };
        let text = request.send().await.unwrap().text().await.unwrap();
        let envelope: Envelope = serde_json::from_str(&text).unwrap();
        assert_eq!(stdout.trim_end(), envelope.data.get(), "{args:?}");
    }
}
