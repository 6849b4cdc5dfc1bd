use std::sync::{Arc, PoisonError, RwLock};

use akg_core::AkgGraph;

use crate::backend::Backend;
use crate::error::ApiError;

/// Shared service state.
///
/// Readers take an `Arc` snapshot and never block the writer for longer than a
/// pointer clone. Writers apply their change to a private copy and publish it
/// only on success, so a failed mutation leaves no trace.
pub struct AppState {
    graph: RwLock<Arc<AkgGraph>>,
    pub backend: Backend,
}

impl AppState {
    pub fn new(graph: AkgGraph, backend: Backend) -> Self {
        AppState {
            graph: RwLock::new(Arc::new(graph)),
            backend,
        }
    }

    pub fn snapshot(&self) -> Arc<AkgGraph> {
        self.graph.read().unwrap_or_else(PoisonError::into_inner).clone()
    }

    /// Runs `f` on a copy of the current graph under the writer lock and
    /// returns its result together with the resulting `graph_version`.
    pub fn mutate<T>(&self, f: impl FnOnce(&mut AkgGraph) -> Result<T, ApiError>) -> (Result<T, ApiError>, u64) {
        let mut current = self.graph.write().unwrap_or_else(PoisonError::into_inner);
        let mut next = AkgGraph::clone(&current);
        match f(&mut next) {
            Ok(value) => {
                let version = next.version();
                if version != current.version() {
                    *current = Arc::new(next);
                }
                (Ok(value), version)
            }
            Err(e) => (Err(e), current.version()),
        }
    }

    /// Swaps in a freshly loaded graph; both counters move strictly forward.
    pub fn replace(&self, mut graph: AkgGraph) -> u64 {
        let mut current = self.graph.write().unwrap_or_else(PoisonError::into_inner);
        graph.advance_version_to(current.version() + 1);
        graph.advance_eligibility_token_to(current.eligibility_token() + 1);
        let version = graph.version();
        *current = Arc::new(graph);
        version
    }
}
