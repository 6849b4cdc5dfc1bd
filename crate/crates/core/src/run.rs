//! Instance-level expansion of class-level product-and-process definitions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attr::AttrValue;
use crate::graph::{AkgGraph, Direction, EdgeKind, GraphError, NodeKind};
use crate::iri::Iri;
use crate::vocab;

/// One production run: a product instance plus one step instance per process class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessRun {
    /// The IRI of the run's product instance.
    pub run_id: Iri,
    pub product_class: Iri,
    /// Step instances in topological order of their classes.
    pub steps: Vec<Iri>,
    pub created_at: i64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("<{0}> is not a product class")]
    NotAProductClass(Iri),
    #[error("product class <{0}> has no processes")]
    EmptyProcessDefinition(Iri),
    #[error("the process definition of <{0}> has a hasSuccessor cycle")]
    CyclicProcessDefinition(Iri),
    #[error("run count must be at least 1")]
    ZeroRuns,
    #[error("unknown run `{0}`")]
    UnknownRun(String),
}

/// Process classes reachable from `product` through `hasInput`/`hasOutput`/`hasSuccessor`
/// (either direction, class level only), in topological order with lexicographic tie-breaks.
pub fn process_definition(graph: &AkgGraph, product: &Iri) -> Result<Vec<Iri>, RunError> {
    if graph.kind(product)? != NodeKind::ProductClass {
        return Err(RunError::NotAProductClass(product.clone()));
    }
    const LINKS: [EdgeKind; 3] = [EdgeKind::HasInput, EdgeKind::HasOutput, EdgeKind::HasSuccessor];
    let mut seen = BTreeSet::from([product.clone()]);
    let mut queue = VecDeque::from([product.clone()]);
    while let Some(n) = queue.pop_front() {
        for kind in LINKS {
            for dir in [Direction::Out, Direction::In] {
                for m in graph.adjacent(&n, kind, dir) {
                    let class_level = matches!(graph.kind(m), Ok(NodeKind::ProductClass | NodeKind::ProcessClass));
                    if class_level && seen.insert(m.clone()) {
                        queue.push_back(m.clone());
                    }
                }
            }
        }
    }
    let processes: BTreeSet<Iri> = seen
        .into_iter()
        .filter(|i| graph.kind(i) == Ok(NodeKind::ProcessClass))
        .collect();
    if processes.is_empty() {
        return Err(RunError::EmptyProcessDefinition(product.clone()));
    }

    let mut indegree: BTreeMap<&Iri, usize> = processes.iter().map(|p| (p, 0)).collect();
    for p in &processes {
        for s in graph.adjacent(p, EdgeKind::HasSuccessor, Direction::Out) {
            if let Some(d) = indegree.get_mut(s) {
                *d += 1;
            }
        }
    }
    let mut ready: BTreeSet<&Iri> = indegree.iter().filter(|(_, d)| **d == 0).map(|(p, _)| *p).collect();
    let mut order = Vec::with_capacity(processes.len());
    while let Some(p) = ready.pop_first() {
        order.push(p.clone());
        for s in graph.adjacent(p, EdgeKind::HasSuccessor, Direction::Out) {
            if let Some(d) = indegree.get_mut(s) {
                *d -= 1;
                if *d == 0 {
                    ready.insert(s);
                }
            }
        }
    }
    if order.len() != processes.len() {
        return Err(RunError::CyclicProcessDefinition(product.clone()));
    }
    Ok(order)
}

/// Instantiates `n` runs stamped with the current wall-clock time.
pub fn instantiate_run(graph: &mut AkgGraph, product: &Iri, n: usize) -> Result<Vec<ProcessRun>, RunError> {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    instantiate_run_at(graph, product, n, now)
}

/// Instantiates `n` runs of `product`'s process definition.
///
/// Each run gets a product instance `<product>/run<k>` and one step instance
/// `<product>/run<k>/<process local name>` per process class, linked by
/// `instanceOf`. Class-level nodes and edges are left untouched.
pub fn instantiate_run_at(
    graph: &mut AkgGraph,
    product: &Iri,
    n: usize,
    created_at: i64,
) -> Result<Vec<ProcessRun>, RunError> {
    if n == 0 {
        return Err(RunError::ZeroRuns);
    }
    let processes = process_definition(graph, product)?;
    let step_suffixes = step_suffixes(&processes);
    let outputs_product: BTreeSet<&Iri> = processes
        .iter()
        .filter(|p| graph.has_edge(p, EdgeKind::HasOutput, product))
        .collect();

    // Validate every IRI up front so a failure leaves the graph untouched.
    let mut plans = Vec::with_capacity(n);
    let mut k = 1usize;
    while plans.len() < n {
        let run_iri = Iri::new(format!("{product}/run{k}")).map_err(|_| RunError::NotAProductClass(product.clone()))?;
        k += 1;
        let step_iris: Vec<Iri> = step_suffixes
            .iter()
            .map(|s| Iri::new(format!("{run_iri}/{s}")).expect("derived from valid IRIs"))
            .collect();
        if graph.contains(&run_iri) || step_iris.iter().any(|s| graph.contains(s)) {
            continue;
        }
        plans.push((run_iri, step_iris));
    }

    let mut runs = Vec::with_capacity(n);
    for (run_iri, step_iris) in plans {
        let label = format!("{} {}", graph.try_node(product)?.label, run_iri.local_name());
        let attrs = BTreeMap::from([(vocab::CREATED_AT.to_string(), AttrValue::int(created_at))]);
        graph.add_node(run_iri.clone(), NodeKind::ProductInstance, label.trim(), attrs)?;
        graph.add_edge(&run_iri, EdgeKind::InstanceOf, product)?;
        for (idx, (class, step)) in processes.iter().zip(&step_iris).enumerate() {
            let label = format!("{} ({})", graph.try_node(class)?.label, run_iri.local_name());
            let attrs = BTreeMap::from([
                (vocab::RUN_ID.to_string(), AttrValue::Ref(run_iri.clone())),
                (vocab::STEP_INDEX.to_string(), AttrValue::int(idx as i64)),
            ]);
            graph.add_node(step.clone(), NodeKind::ProcessStepInstance, label, attrs)?;
            graph.add_edge(step, EdgeKind::InstanceOf, class)?;
            if outputs_product.contains(class) {
                graph.add_edge(step, EdgeKind::HasOutput, &run_iri)?;
            }
        }
        runs.push(ProcessRun {
            run_id: run_iri,
            product_class: product.clone(),
            steps: step_iris,
            created_at,
        });
    }
    Ok(runs)
}

fn step_suffixes(processes: &[Iri]) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in processes {
        *counts.entry(p.local_name()).or_default() += 1;
    }
    processes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let local = p.local_name();
            let clean = local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if counts[local] == 1 && clean {
                local.to_string()
            } else {
                format!("step{i}")
            }
        })
        .collect()
}

/// Reads a run back from the graph by its id (the product instance IRI).
pub fn load_run(graph: &AkgGraph, run_id: &Iri) -> Result<ProcessRun, RunError> {
    let node = graph.node(run_id).ok_or_else(|| RunError::UnknownRun(run_id.to_string()))?;
    if node.kind != NodeKind::ProductInstance {
        return Err(RunError::UnknownRun(run_id.to_string()));
    }
    let product_class = graph
        .adjacent(run_id, EdgeKind::InstanceOf, Direction::Out)
        .next()
        .cloned()
        .ok_or_else(|| RunError::UnknownRun(run_id.to_string()))?;
    let created_at = node
        .attr(vocab::CREATED_AT)
        .and_then(AttrValue::as_number)
        .map(|n| n.value() as i64)
        .unwrap_or(0);
    let mut steps: Vec<(u64, Iri)> = graph
        .nodes_of_kind(NodeKind::ProcessStepInstance)
        .filter_map(|s| {
            let n = graph.node(s)?;
            (n.attr(vocab::RUN_ID)?.as_ref_iri()? == run_id).then(|| {
                let idx = n.attr(vocab::STEP_INDEX).and_then(AttrValue::as_number).and_then(|x| x.as_u64());
                (idx.unwrap_or(u64::MAX), s.clone())
            })
        })
        .collect();
    steps.sort();
    Ok(ProcessRun {
        run_id: run_id.clone(),
        product_class,
        steps: steps.into_iter().map(|(_, s)| s).collect(),
        created_at,
    })
}

/// All runs stored in the graph, ordered by run id.
pub fn list_runs(graph: &AkgGraph) -> Vec<ProcessRun> {
    graph
        .nodes_of_kind(NodeKind::ProductInstance)
        .filter_map(|r| load_run(graph, r).ok())
        .filter(|r| !r.steps.is_empty())
        .collect()
}
