//! HTTP/JSON facade over the knowledge graph engine.
//!
//! Every response is an [`ApiEnvelope`]. Reads run against `Arc` snapshots;
//! mutations are serialized through a single writer lock and published
//! atomically, so `graph_version` is strictly monotone across clients.

pub mod backend;
pub mod error;
pub mod ops;
pub mod routes;
pub mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use akg_core::{load_turtle, AkgGraph, ParseError};

pub use backend::{Backend, RemoteBackend};
pub use error::{ApiError, ErrorBody};
pub use routes::{router, ApiEnvelope, NlQuery};
pub use state::AppState;

pub const ENV_ADDR: &str = "PPR_ADDR";
pub const ENV_GRAPH: &str = "PPR_GRAPH";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, Clone)]
pub struct Config {
    pub addr: String,
    pub graph: Option<PathBuf>,
    pub backend: Backend,
}

impl Config {
    pub fn from_env() -> Self {
        Config {
            addr: std::env::var(ENV_ADDR).unwrap_or_else(|_| DEFAULT_ADDR.to_string()),
            graph: std::env::var_os(ENV_GRAPH).map(PathBuf::from),
            backend: Backend::from_env(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {}", .errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Parse { path: PathBuf, errors: Vec<ParseError> },
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn load_graph(path: &std::path::Path) -> Result<AkgGraph, ServeError> {
    let text = std::fs::read_to_string(path).map_err(|source| ServeError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    load_turtle(&text).map_err(|errors| ServeError::Parse {
        path: path.to_path_buf(),
        errors,
    })
}

/// Binds `addr` and returns the listener together with the bound address.
pub async fn bind(addr: &str) -> Result<(tokio::net::TcpListener, SocketAddr), ServeError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|source| ServeError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    let local = listener.local_addr()?;
    Ok((listener, local))
}

pub async fn serve_on(listener: tokio::net::TcpListener, state: Arc<AppState>) -> Result<(), ServeError> {
    axum::serve(listener, router(state)).await?;
    Ok(())
}

pub async fn serve(config: Config) -> Result<(), ServeError> {
    let graph = match &config.graph {
        Some(path) => load_graph(path)?,
        None => AkgGraph::new(),
    };
    tracing::info!(nodes = graph.node_count(), backend = config.backend.name(), "graph loaded");
    let state = Arc::new(AppState::new(graph, config.backend));
    let (listener, local) = bind(&config.addr).await?;
    tracing::info!(%local, "listening");
    serve_on(listener, state).await
}
