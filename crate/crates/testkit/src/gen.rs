use std::collections::{BTreeMap, BTreeSet};

use akg_core::diagnosis::ObservationContext;
use akg_core::matchmaker::{ProvidedCapabilitySpec, RequiredCapabilitySpec};
use akg_core::scheduler::{SchedStep, SchedulingInstance};
use akg_core::{AkgGraph, AttrValue, Constraint, ConstraintOp, EdgeKind, Iri, Number, NodeKind};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

fn iri(s: impl Into<String>) -> Iri {
    Iri::new(s).expect("generated IRIs are valid")
}

const TEXT_ALPHABET: &[&str] = &["a", "b", "Z", " ", "\"", "\\", "\n", "\t", "é", "→", "'", "#", "<", "9", "."];

pub fn text(rng: &mut impl Rng, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| *TEXT_ALPHABET.choose(rng).expect("non-empty")).collect()
}

pub fn number(rng: &mut impl Rng) -> Number {
    let lexical = match rng.random_range(0..6) {
        0 => rng.random_range(-50i64..50).to_string(),
        1 => format!("+{}", rng.random_range(0..100)),
        2 => format!("{}.{:02}", rng.random_range(-9i64..10), rng.random_range(0..100)),
        3 => format!("{}.{}e{}", rng.random_range(1..10), rng.random_range(0..10), rng.random_range(-3i32..4)),
        4 => format!("{}E+2", rng.random_range(1..10)),
        _ => format!("0.{}", rng.random_range(0..1000)),
    };
    Number::parse(&lexical).expect("generated lexical is numeric")
}

fn text_set(rng: &mut impl Rng) -> AttrValue {
    let n = rng.random_range(1..=3);
    AttrValue::set((0..n).map(|_| text(rng, 4)))
}

/// Shape limits for [`random_graph`].
#[derive(Debug, Clone, Copy)]
pub struct GraphParams {
    pub max_nodes: usize,
    pub max_triples: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        GraphParams {
            max_nodes: 30,
            max_triples: 200,
        }
    }
}

const NAMESPACES: &[&str] = &["http://example.org/plant#", "http://vendor.example/v/", "urn:asset:"];
const GENERIC_ATTRS: &[&str] = &["color", "mass_kg", "note", "enabled", "tags", "http://other.example/vocab#grade"];

fn generic_value(rng: &mut impl Rng, nodes: &[Iri]) -> AttrValue {
    match rng.random_range(0..5) {
        0 => AttrValue::Number(number(rng)),
        1 => AttrValue::Text(text(rng, 8)),
        2 => AttrValue::Bool(rng.random()),
        3 => text_set(rng),
        _ => AttrValue::Ref(nodes.choose(rng).cloned().unwrap_or_else(|| iri("http://other.example/thing"))),
    }
}

/// A valid graph covering every node kind, edge kind and attribute variant,
/// with at most `params.max_triples` triples when serialized.
pub fn random_graph(rng: &mut impl Rng, params: GraphParams) -> AkgGraph {
    let mut g = AkgGraph::new();
    g.prefixes_mut().insert("ex", NAMESPACES[0]).expect("fresh prefix");
    if rng.random_bool(0.5) {
        g.prefixes_mut().insert("vend", NAMESPACES[1]).expect("fresh prefix");
    }
    let mut budget = params.max_triples;
    let n = rng.random_range(1..=params.max_nodes.max(1));
    let mut iris = Vec::with_capacity(n);
    for i in 0..n {
        if budget == 0 {
            break;
        }
        let ns = NAMESPACES.choose(rng).expect("non-empty");
        let local = match rng.random_range(0..4) {
            0 => format!("n{i}.v{}", rng.random_range(0..9)),
            1 => format!("N-{i}_x"),
            _ => format!("Node{i}"),
        };
        let id = iri(format!("{ns}{local}"));
        let kind = *NodeKind::ALL.choose(rng).expect("non-empty");
        budget -= 1;
        let label = if budget > 0 && rng.random_bool(0.6) {
            budget -= 1;
            let l = text(rng, 10);
            if l.is_empty() {
                "x".to_string()
            } else {
                l
            }
        } else {
            String::new()
        };
        let mut attrs = BTreeMap::new();
        for _ in 0..rng.random_range(0..=3) {
            let (name, value) = match (kind, rng.random_range(0..3)) {
                (NodeKind::ProcessClass, 0) => ("duration_s".to_string(), AttrValue::int(rng.random_range(1..20))),
                (NodeKind::PlausibleCause, 0) => (
                    "weight".to_string(),
                    AttrValue::Number(Number::parse(&format!("0.{}", rng.random_range(0..100))).expect("numeric")),
                ),
                (NodeKind::RequiredCapability | NodeKind::ProvidedCapability, 0) => (
                    "capability_kind".to_string(),
                    AttrValue::Ref(iri(format!("{}Kind{}", NAMESPACES[0], rng.random_range(0..3)))),
                ),
                (NodeKind::RequiredCapability, 1) => {
                    let c = random_constraint(rng, &["torque_nm", "payload_kg", "camera"]);
                    (c.attr_name(), c.value)
                }
                _ => (
                    GENERIC_ATTRS.choose(rng).expect("non-empty").to_string(),
                    generic_value(rng, &iris),
                ),
            };
            let cost = match &value {
                AttrValue::Set(s) => s.len(),
                _ => 1,
            };
            if cost > budget {
                continue;
            }
            if attrs.insert(name, value).is_none() {
                budget -= cost;
            }
        }
        g.add_node(id.clone(), kind, label, attrs).expect("generated node is valid");
        iris.push(id);
    }
    let attempts = rng.random_range(0..=3 * iris.len());
    for _ in 0..attempts {
        if budget == 0 {
            break;
        }
        let kind = *EdgeKind::ALL.choose(rng).expect("non-empty");
        let domain = kind.domain();
        let subjects: Vec<&Iri> = iris.iter().filter(|i| domain.contains(&g.kind(i).expect("present"))).collect();
        let Some(s) = subjects.choose(rng).copied() else {
            continue;
        };
        let range = kind.range_for(g.kind(s).expect("present"));
        let objects: Vec<&Iri> = iris.iter().filter(|i| range.contains(&g.kind(i).expect("present"))).collect();
        let Some(o) = objects.choose(rng).copied() else {
            continue;
        };
        // closing a hasSuccessor cycle is rejected; skip those
        if g.add_edge(s, kind, o).unwrap_or(false) {
            budget -= 1;
        }
    }
    g
}

const PAIR_ATTRS: &[&str] = &["a", "b", "c"];
const PAIR_TEXTS: &[&str] = &["x", "y", "z"];

fn small_number(rng: &mut impl Rng) -> AttrValue {
    let v = rng.random_range(-2i64..6);
    let lexical = match rng.random_range(0..3) {
        0 => format!("{v}.0"),
        1 => format!("{v}.5"),
        _ => v.to_string(),
    };
    AttrValue::Number(Number::parse(&lexical).expect("numeric"))
}

fn small_set(rng: &mut impl Rng) -> AttrValue {
    let members: Vec<&str> = PAIR_TEXTS.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
    if members.is_empty() {
        AttrValue::set([*PAIR_TEXTS.choose(rng).expect("non-empty")])
    } else {
        AttrValue::set(members)
    }
}

fn small_value(rng: &mut impl Rng, numeric_bias: f64) -> AttrValue {
    if rng.random_bool(numeric_bias) {
        return small_number(rng);
    }
    match rng.random_range(0..3) {
        0 => AttrValue::text(*PAIR_TEXTS.choose(rng).expect("non-empty")),
        1 => AttrValue::Bool(rng.random()),
        _ => small_set(rng),
    }
}

pub fn random_constraint(rng: &mut impl Rng, attrs: &[&str]) -> Constraint {
    let op = *ConstraintOp::ALL.choose(rng).expect("non-empty");
    let value = match op {
        ConstraintOp::In => small_set(rng),
        o if o.is_ordering() => small_number(rng),
        _ => small_value(rng, 0.5),
    };
    Constraint::new(*attrs.choose(rng).expect("non-empty"), op, value).expect("value fits operator")
}

fn kind_iri(k: usize) -> Iri {
    iri(format!("http://kinds.example/K{k}"))
}

/// A random required/provided pair over a small attribute and kind vocabulary,
/// so that matches, misses and type mismatches all occur.
pub fn random_pair(rng: &mut impl Rng) -> (RequiredCapabilitySpec, ProvidedCapabilitySpec) {
    let numeric_bias = if rng.random_bool(0.7) { 1.0 } else { 0.6 };
    let req = RequiredCapabilitySpec {
        capability_kind: kind_iri(rng.random_range(0..2)),
        constraints: (0..rng.random_range(0..=3)).map(|_| random_constraint(rng, PAIR_ATTRS)).collect(),
    };
    let mut prov = ProvidedCapabilitySpec {
        capability_kind: kind_iri(rng.random_range(0..2)),
        attributes: BTreeMap::new(),
    };
    for a in PAIR_ATTRS {
        if rng.random_bool(0.75) {
            prov.attributes.insert(a.to_string(), small_value(rng, numeric_bias));
        }
    }
    (req, prov)
}

fn add_required(g: &mut AkgGraph, id: &Iri, spec: &RequiredCapabilitySpec) {
    let mut attrs: BTreeMap<String, AttrValue> =
        spec.constraints.iter().map(|c| (c.attr_name(), c.value.clone())).collect();
    attrs.insert("capability_kind".into(), AttrValue::Ref(spec.capability_kind.clone()));
    g.add_node(id.clone(), NodeKind::RequiredCapability, "", attrs).expect("valid requirement");
}

fn add_provided(g: &mut AkgGraph, id: &Iri, spec: &ProvidedCapabilitySpec) {
    let mut attrs = spec.attributes.clone();
    attrs.insert("capability_kind".into(), AttrValue::Ref(spec.capability_kind.clone()));
    g.add_node(id.clone(), NodeKind::ProvidedCapability, "", attrs).expect("valid capability");
}

/// Up to `max_resources` resources and `max_processes` processes with random
/// requirements and capabilities. Requirements and capabilities may be shared.
pub fn random_match_graph(rng: &mut impl Rng, max_resources: usize, max_processes: usize) -> AkgGraph {
    let mut g = AkgGraph::new();
    let reqs: Vec<Iri> = (0..rng.random_range(0..=6)).map(|i| iri(format!("http://m/req{i}"))).collect();
    for r in &reqs {
        let (spec, _) = random_pair(rng);
        add_required(&mut g, r, &spec);
    }
    let caps: Vec<Iri> = (0..rng.random_range(0..=8)).map(|i| iri(format!("http://m/cap{i}"))).collect();
    for c in &caps {
        let (_, spec) = random_pair(rng);
        add_provided(&mut g, c, &spec);
    }
    for p in 0..rng.random_range(1..=max_processes) {
        let id = iri(format!("http://m/proc{p}"));
        g.add_node(id.clone(), NodeKind::ProcessClass, "", BTreeMap::new()).expect("fresh");
        for r in reqs.iter().filter(|_| rng.random_bool(0.35)) {
            g.add_edge(&id, EdgeKind::RequiresCapability, r).expect("typed");
        }
    }
    for r in 0..rng.random_range(0..=max_resources) {
        let id = iri(format!("http://m/res{r}"));
        g.add_node(id.clone(), NodeKind::Resource, "", BTreeMap::new()).expect("fresh");
        for c in caps.iter().filter(|_| rng.random_bool(0.35)) {
            g.add_edge(&id, EdgeKind::ProvidesCapability, c).expect("typed");
        }
    }
    g
}

/// Random scheduling instance: steps with durations in 1..=6, non-empty
/// eligible subsets and a random precedence DAG.
pub fn random_instance(rng: &mut impl Rng, max_steps: usize, max_resources: usize) -> SchedulingInstance {
    let n = rng.random_range(1..=max_steps);
    let m = rng.random_range(1..=max_resources);
    let resources: Vec<Iri> = (0..m).map(|r| iri(format!("http://sched/r{r}"))).collect();
    let mut names: Vec<Iri> = (0..n).map(|i| iri(format!("http://sched/s{i}"))).collect();
    names.shuffle(rng);
    let edge_p = rng.random_range(0.0..0.5);
    let steps = (0..n)
        .map(|i| {
            let mut eligible: BTreeSet<Iri> = resources.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
            if eligible.is_empty() {
                eligible.insert(resources.choose(rng).expect("non-empty").clone());
            }
            SchedStep {
                step: names[i].clone(),
                duration_s: rng.random_range(1..=6),
                eligible,
                predecessors: (0..i).filter(|_| rng.random_bool(edge_p)).map(|j| names[j].clone()).collect(),
            }
        })
        .collect();
    SchedulingInstance {
        steps,
        resources: resources.into_iter().collect(),
        eligibility_token: None,
    }
}

/// A graph with conditions, global and resource-scoped causes, processes,
/// step instances with optional allocations, and a sample of observation
/// contexts over it.
pub fn random_diagnosis_case(rng: &mut impl Rng) -> (AkgGraph, Vec<ObservationContext>) {
    let mut g = AkgGraph::new();
    let resources: Vec<Iri> = (0..rng.random_range(1..=4)).map(|i| iri(format!("http://d/res{i}"))).collect();
    for (i, r) in resources.iter().enumerate() {
        g.add_node(r.clone(), NodeKind::Resource, "", BTreeMap::new()).expect("fresh");
        let cap = iri(format!("http://d/cap{i}"));
        let attrs = BTreeMap::from([
            ("capability_kind".to_string(), AttrValue::Ref(kind_iri(rng.random_range(0..2)))),
            ("p".to_string(), AttrValue::int(rng.random_range(0..10))),
        ]);
        g.add_node(cap.clone(), NodeKind::ProvidedCapability, "", attrs).expect("fresh");
        g.add_edge(r, EdgeKind::ProvidesCapability, &cap).expect("typed");
    }
    let processes: Vec<Iri> = (0..rng.random_range(1..=3)).map(|i| iri(format!("http://d/proc{i}"))).collect();
    for (i, p) in processes.iter().enumerate() {
        g.add_node(p.clone(), NodeKind::ProcessClass, "", BTreeMap::new()).expect("fresh");
        if rng.random_bool(0.7) {
            let req = iri(format!("http://d/req{i}"));
            let attrs = BTreeMap::from([
                ("capability_kind".to_string(), AttrValue::Ref(kind_iri(rng.random_range(0..2)))),
                ("p__ge".to_string(), AttrValue::int(rng.random_range(0..10))),
            ]);
            g.add_node(req.clone(), NodeKind::RequiredCapability, "", attrs).expect("fresh");
            g.add_edge(p, EdgeKind::RequiresCapability, &req).expect("typed");
        }
    }
    let mut steps = Vec::new();
    for (i, p) in processes.iter().enumerate() {
        for k in 0..rng.random_range(0..=2) {
            let s = iri(format!("http://d/run{k}/step{i}"));
            g.add_node(s.clone(), NodeKind::ProcessStepInstance, "", BTreeMap::new()).expect("fresh");
            g.add_edge(&s, EdgeKind::InstanceOf, p).expect("typed");
            for r in resources.iter().filter(|_| rng.random_bool(0.25)) {
                g.add_edge(&s, EdgeKind::AllocatedTo, r).expect("typed");
            }
            steps.push(s);
        }
    }
    let causes: Vec<Iri> = (0..rng.random_range(0..=7)).map(|i| iri(format!("http://d/cause{i}"))).collect();
    for c in &causes {
        let mut attrs = BTreeMap::new();
        if rng.random_bool(0.8) {
            // coarse grid so that equal weights and the IRI tie-break occur
            let w = rng.random_range(0..=4) as f64 / 4.0;
            attrs.insert("weight".to_string(), AttrValue::number(w));
        }
        g.add_node(c.clone(), NodeKind::PlausibleCause, "", attrs).expect("fresh");
        for r in resources.iter().filter(|_| rng.random_bool(0.3)) {
            g.add_edge(r, EdgeKind::DefinesCause, c).expect("typed");
        }
    }
    let conditions: Vec<Iri> = (0..rng.random_range(1..=3)).map(|i| iri(format!("http://d/cond{i}"))).collect();
    for c in &conditions {
        g.add_node(c.clone(), NodeKind::UndesiredCondition, "", BTreeMap::new()).expect("fresh");
        for cause in causes.iter().filter(|_| rng.random_bool(0.5)) {
            g.add_edge(c, EdgeKind::HasPlausibleCause, cause).expect("typed");
        }
    }
    let step_choices: Vec<Iri> = processes.iter().chain(&steps).cloned().collect();
    let contexts = (0..6)
        .map(|_| ObservationContext {
            condition: conditions.choose(rng).expect("non-empty").clone(),
            affected_step: rng.random_bool(0.5).then(|| step_choices.choose(rng).expect("non-empty").clone()),
            observed_on_resource: rng.random_bool(0.4).then(|| resources.choose(rng).expect("non-empty").clone()),
        })
        .collect();
    (g, contexts)
}
