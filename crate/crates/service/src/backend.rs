//! Natural-language backends. A backend only picks the intent and its slots;
//! the answer is always computed by the engine and rendered from templates.

use std::time::Duration;

use akg_core::nl::{classify, Intent, IntentParse};
use akg_core::{AkgGraph, NodeKind};
use serde::Deserialize;
use serde_json::json;

use crate::error::ApiError;

pub const ENV_LLM_URL: &str = "PPR_LLM_URL";
pub const ENV_LLM_MODEL: &str = "PPR_LLM_MODEL";
pub const ENV_LLM_KEY: &str = "PPR_LLM_KEY";
pub const ENV_LLM_FALLBACK: &str = "PPR_LLM_FALLBACK";

#[derive(Debug, Clone)]
pub enum Backend {
    Deterministic,
    Remote(RemoteBackend),
}

/// Client for an OpenAI-style `POST {base_url}/chat/completions` endpoint.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    pub base_url: String,
    pub model: String,
    pub key: Option<String>,
    /// Use the deterministic rules when the remote call fails.
    pub fallback: bool,
    client: reqwest::Client,
}

impl RemoteBackend {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, key: Option<String>, fallback: bool) -> Self {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .expect("static client configuration");
        RemoteBackend {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            key,
            fallback,
            client,
        }
    }

    async fn complete(&self, question: &str, graph: &AkgGraph) -> Result<RemoteParse, String> {
        let body = json!({
            "model": self.model,
            "temperature": 0,
            "response_format": {"type": "json_object"},
            "messages": [
                {"role": "system", "content": system_prompt(graph)},
                {"role": "user", "content": question},
            ],
        });
        let mut request = self.client.post(format!("{}/chat/completions", self.base_url)).json(&body);
        if let Some(key) = &self.key {
            request = request.bearer_auth(key);
        }
        let response = request.send().await.map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            return Err(format!("remote backend answered {status}"));
        }
        let completion: Completion = response.json().await.map_err(|e| e.to_string())?;
        let content = completion
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or("completion has no choices")?;
        serde_json::from_str(strip_fence(&content)).map_err(|e| format!("unreadable classification: {e}"))
    }
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

#[derive(Deserialize)]
struct RemoteParse {
    intent: String,
    #[serde(default)]
    slot: Option<String>,
    #[serde(default)]
    n: Option<usize>,
}

fn strip_fence(s: &str) -> &str {
    let s = s.trim();
    let s = s.strip_prefix("```json").or_else(|| s.strip_prefix("```")).unwrap_or(s);
    s.strip_suffix("```").unwrap_or(s).trim()
}

fn system_prompt(graph: &AkgGraph) -> String {
    let mut prompt = String::from(
        "Classify the operator question. Reply with one JSON object {\"intent\", \"slot\", \"n\"}. \
intent is one of diagnose, schedule, match, lookup, unknown. slot is the IRI of one node listed below: \
an undesired condition for diagnose, a product class for schedule, a process class for match, any node for lookup. \
n is the run count for schedule. Do not answer the question.\n",
    );
    for kind in [NodeKind::UndesiredCondition, NodeKind::ProductClass, NodeKind::ProcessClass, NodeKind::Resource] {
        for iri in graph.nodes_of_kind(kind) {
            let label = graph.node(iri).map(|n| n.label.as_str()).unwrap_or_default();
            prompt.push_str(&format!("{} <{iri}> \"{label}\"\n", kind.name()));
        }
    }
    prompt
}

fn parse_intent(s: &str) -> Intent {
    match s.trim().to_ascii_lowercase().as_str() {
        "diagnose" => Intent::Diagnose,
        "schedule" => Intent::Schedule,
        "match" => Intent::Match,
        "lookup" => Intent::Lookup,
        _ => Intent::Unknown,
    }
}

/// Anything the graph cannot ground becomes `unknown`.
fn ground(remote: RemoteParse, graph: &AkgGraph) -> IntentParse {
    let intent = parse_intent(&remote.intent);
    if intent == Intent::Unknown {
        return IntentParse::unknown();
    }
    let Some(slot) = remote.slot.and_then(|s| graph.resolve(&s).ok()) else {
        return IntentParse::unknown();
    };
    let fits = match (graph.kind(&slot), intent.slot_kind()) {
        (Ok(found), Some(expected)) => found == expected,
        (Ok(_), None) => true,
        (Err(_), _) => false,
    };
    if !fits {
        return IntentParse::unknown();
    }
    let n = (intent == Intent::Schedule).then(|| remote.n.unwrap_or(1).max(1));
    IntentParse {
        intent,
        slot: Some(slot),
        n,
    }
}

impl Backend {
    pub fn from_env() -> Self {
        match std::env::var(ENV_LLM_URL) {
            Ok(url) if !url.trim().is_empty() => {
                let model = std::env::var(ENV_LLM_MODEL).unwrap_or_else(|_| "default".to_string());
                let key = std::env::var(ENV_LLM_KEY).ok().filter(|k| !k.is_empty());
                let fallback = matches!(
                    std::env::var(ENV_LLM_FALLBACK).as_deref().map(str::to_ascii_lowercase).as_deref(),
                    Ok("1" | "true" | "yes")
                );
                Backend::Remote(RemoteBackend::new(url, model, key, fallback))
            }
            _ => Backend::Deterministic,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Deterministic => "deterministic",
            Backend::Remote(_) => "remote",
        }
    }

    pub async fn classify(&self, question: &str, graph: &AkgGraph) -> Result<IntentParse, ApiError> {
        match self {
            Backend::Deterministic => Ok(classify(question, graph)),
            Backend::Remote(remote) => match remote.complete(question, graph).await {
                Ok(parse) => Ok(ground(parse, graph)),
                Err(reason) if remote.fallback => {
                    tracing::warn!(%reason, "remote backend failed, using deterministic rules");
                    Ok(classify(question, graph))
                }
                Err(reason) => Err(ApiError::new(503, "backend_unavailable", reason)),
            },
        }
    }
}
