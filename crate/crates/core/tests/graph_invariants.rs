use std::collections::{BTreeMap, BTreeSet};

use akg_core::{
    fixtures, instantiate_run_at, serialize_turtle, AkgGraph, AttrValue, Direction, EdgeKind, GraphError, Iri, NodeKind,
};
use akg_testkit::gen::{random_graph, GraphParams};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;

fn ex(s: &str) -> Iri {
    Iri::new(format!("http://ex.org/{s}")).unwrap()
}

/// Reachability by plain DFS over the stored hasSuccessor edges.
fn reaches(g: &AkgGraph, from: &Iri, to: &Iri) -> bool {
    let mut stack = vec![from.clone()];
    let mut seen = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if &n == to {
            return true;
        }
        if seen.insert(n.clone()) {
            stack.extend(g.edges().filter(|e| e.subject == n && e.kind == EdgeKind::HasSuccessor).map(|e| e.object.clone()));
        }
    }
    false
}

#[test]
fn add_node_examples() {
    let mut g = AkgGraph::new();
    g.add_node(ex("Cell1"), NodeKind::ProductClass, "Battery cell", BTreeMap::new()).unwrap();
    assert_eq!(g.kind(&ex("Cell1")), Ok(NodeKind::ProductClass));
    assert_eq!(
        g.add_node(ex("Cell1"), NodeKind::ProductClass, "", BTreeMap::new()).unwrap_err(),
        GraphError::DuplicateIri(ex("Cell1"))
    );
    let attrs = BTreeMap::from([("payload_kg".to_string(), AttrValue::int(12))]);
    g.add_node(ex("Robot1"), NodeKind::Resource, "Disassembly robot", attrs).unwrap();
    let v = g.node(&ex("Robot1")).unwrap().attr("payload_kg").unwrap();
    assert_eq!(v.as_number().unwrap().value(), 12.0);
}

#[test]
fn add_edge_examples() {
    let mut g = fixtures::demo();
    assert!(matches!(
        g.add_edge(&ex("Robot1"), EdgeKind::HasSuccessor, &ex("Unscrew")),
        Err(GraphError::TypeViolation { .. })
    ));
    assert!(matches!(
        g.add_edge(&ex("InspectModule"), EdgeKind::HasSuccessor, &ex("Transport")),
        Err(GraphError::CycleIntroduced(_))
    ));
    assert!(matches!(
        g.add_edge(&ex("Nope"), EdgeKind::HasSuccessor, &ex("Transport")),
        Err(GraphError::UnknownNode(_))
    ));
    assert!(!g.add_edge(&ex("Unscrew"), EdgeKind::RequiresCapability, &ex("ReqUnscrewTorque")).unwrap());
}

#[test]
fn neighbors_examples() {
    let mut g = AkgGraph::new();
    g.add_node(ex("R"), NodeKind::Resource, "", BTreeMap::new()).unwrap();
    assert!(g.neighbors(&ex("R"), EdgeKind::ProvidesCapability, Direction::Out).unwrap().is_empty());
    for c in ["CapB", "CapA"] {
        g.add_node(ex(c), NodeKind::ProvidedCapability, "", BTreeMap::new()).unwrap();
        g.add_edge(&ex("R"), EdgeKind::ProvidesCapability, &ex(c)).unwrap();
    }
    assert_eq!(g.neighbors(&ex("R"), EdgeKind::ProvidesCapability, Direction::Out).unwrap(), vec![ex("CapA"), ex("CapB")]);
    assert!(g.neighbors(&ex("Q"), EdgeKind::ProvidesCapability, Direction::Out).is_err());
}

#[test]
fn instantiate_three_runs_keeps_class_level() {
    let mut g = fixtures::demo();
    let before = serialize_turtle(&g.class_level_subgraph());
    let runs = instantiate_run_at(&mut g, &ex("CellModule"), 3, 0).unwrap();
    assert_eq!(runs.len(), 3);
    assert_eq!(g.nodes_of_kind(NodeKind::ProcessStepInstance).count(), 15);
    let all: BTreeSet<&Iri> = runs.iter().flat_map(|r| &r.steps).collect();
    assert_eq!(all.len(), 15);
    assert_eq!(serialize_turtle(&g.class_level_subgraph()), before);
    for step in all {
        let classes = g.neighbors(step, EdgeKind::InstanceOf, Direction::Out).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(g.kind(&classes[0]), Ok(NodeKind::ProcessClass));
    }
    assert!(instantiate_run_at(&mut g, &ex("CellModule"), 0, 0).is_err());
    assert!(instantiate_run_at(&mut g, &ex("Robot1"), 1, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn stored_edges_are_typed_and_successors_acyclic(seed in any::<u64>()) {
        let mut rng = akg_testkit::rng(seed);
        let mut g = random_graph(&mut rng, GraphParams::default());
        let procs: Vec<Iri> = g.nodes_of_kind(NodeKind::ProcessClass).cloned().collect();
        for _ in 0..20 {
            let (Some(a), Some(b)) = (procs.choose(&mut rng).cloned(), procs.choose(&mut rng).cloned()) else { break };
            let would_cycle = reaches(&g, &b, &a);
            match g.add_edge(&a, EdgeKind::HasSuccessor, &b) {
                Err(GraphError::CycleIntroduced(_)) => prop_assert!(would_cycle),
                Ok(_) => prop_assert!(!would_cycle),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
        for e in g.edges() {
            prop_assert!(e.kind.permits(g.kind(&e.subject).unwrap(), g.kind(&e.object).unwrap()));
        }
        for p in &procs {
            for q in g.neighbors(p, EdgeKind::HasSuccessor, Direction::Out).unwrap() {
                prop_assert!(!reaches(&g, &q, p));
            }
        }
        for c in g.nodes_of_kind(NodeKind::PlausibleCause) {
            prop_assert!(g.cause_scope(c).is_ok());
        }
    }

    #[test]
    fn neighbors_match_edge_scan(seed in any::<u64>()) {
        let mut rng = akg_testkit::rng(seed);
        let g = random_graph(&mut rng, GraphParams::default());
        let nodes: Vec<Iri> = g.nodes().map(|(i, _)| i.clone()).collect();
        for _ in 0..10 {
            let n = nodes.choose(&mut rng).unwrap();
            let kind = *EdgeKind::ALL.choose(&mut rng).unwrap();
            let dir = if rng.random_bool(0.5) { Direction::Out } else { Direction::In };
            let mut expected: Vec<Iri> = g.edges().filter(|e| e.kind == kind).filter_map(|e| match dir {
                Direction::Out if &e.subject == n => Some(e.object.clone()),
                Direction::In if &e.object == n => Some(e.subject.clone()),
                _ => None,
            }).collect();
            expected.sort();
            let got = g.neighbors(n, kind, dir).unwrap();
            prop_assert_eq!(&got, &expected);
            prop_assert_eq!(got, g.neighbors(n, kind, dir).unwrap());
        }
    }
}
