use std::collections::{BTreeMap, BTreeSet};

use akg_core::diagnosis::ObservationContext;
use akg_core::matchmaker::{ProvidedCapabilitySpec, RequiredCapabilitySpec};
use akg_core::scheduler::{Schedule, SchedulingInstance};
use akg_core::{AkgGraph, AttrValue, EdgeKind, Iri, NodeKind};

/// Raised by an oracle when an ordering operator meets a non-numeric attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleTypeError;

fn num(v: &AttrValue) -> Option<f64> {
    match v {
        AttrValue::Number(n) => n.lexical().parse::<f64>().ok(),
        _ => None,
    }
}

fn same(a: &AttrValue, b: &AttrValue) -> bool {
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

/// Evaluates one constraint given by attribute name, operator name and bound.
pub fn eval_constraint(
    attrs: &BTreeMap<String, AttrValue>,
    attribute: &str,
    op: &str,
    bound: &AttrValue,
) -> Result<bool, OracleTypeError> {
    let stored = match attrs.get(attribute) {
        None => return Ok(false),
        Some(v) => v,
    };
    if op == "eq" {
        return Ok(same(stored, bound));
    }
    if op == "ne" {
        return Ok(!same(stored, bound));
    }
    if op == "in" {
        let AttrValue::Set(allowed) = bound else {
            return Ok(false);
        };
        return Ok(match stored {
            AttrValue::Text(t) => allowed.iter().any(|m| m == t),
            AttrValue::Set(s) => s.iter().all(|m| allowed.contains(m)),
            _ => false,
        });
    }
    let x = num(stored).ok_or(OracleTypeError)?;
    let y = num(bound).expect("ordering bound is numeric");
    Ok(match op {
        "lt" => x < y,
        "le" => x <= y,
        "gt" => x > y,
        "ge" => x >= y,
        other => panic!("unknown operator {other}"),
    })
}

/// Kind check, then every constraint independently; any type error wins.
pub fn matches(req: &RequiredCapabilitySpec, prov: &ProvidedCapabilitySpec) -> Result<bool, OracleTypeError> {
    if req.capability_kind.as_str() != prov.capability_kind.as_str() {
        return Ok(false);
    }
    let results: Vec<Result<bool, OracleTypeError>> = req
        .constraints
        .iter()
        .map(|c| eval_constraint(&prov.attributes, &c.attribute, c.op.name(), &c.value))
        .collect();
    if results.iter().any(Result::is_err) {
        return Err(OracleTypeError);
    }
    Ok(results.into_iter().all(|r| r == Ok(true)))
}

const OPS: [&str; 7] = ["eq", "ne", "lt", "le", "gt", "ge", "in"];

fn objects(graph: &AkgGraph, subject: &Iri, kind: EdgeKind) -> Vec<Iri> {
    graph
        .edges()
        .filter(|e| &e.subject == subject && e.kind == kind)
        .map(|e| e.object.clone())
        .collect()
}

fn subjects(graph: &AkgGraph, kind: EdgeKind, object: &Iri) -> Vec<Iri> {
    graph
        .edges()
        .filter(|e| &e.object == object && e.kind == kind)
        .map(|e| e.subject.clone())
        .collect()
}

fn kind_of(graph: &AkgGraph, node: &Iri) -> String {
    match graph.node(node).and_then(|n| n.attrs.get("capability_kind")) {
        Some(AttrValue::Ref(k)) => k.as_str().to_string(),
        _ => node.as_str().to_string(),
    }
}

fn constraints_of(graph: &AkgGraph, req: &Iri) -> Vec<(String, String, AttrValue)> {
    let mut out = Vec::new();
    for (name, value) in &graph.node(req).expect("present").attrs {
        if let Some(idx) = name.rfind("__") {
            let (attr, op) = (&name[..idx], &name[idx + 2..]);
            if !attr.is_empty() && OPS.contains(&op) {
                out.push((attr.to_string(), op.to_string(), value.clone()));
            }
        }
    }
    out
}

/// Eligible resources of a process class by enumerating every
/// (resource, requirement, capability, constraint) tuple over a raw edge scan.
pub fn eligible(graph: &AkgGraph, process: &Iri) -> Result<BTreeSet<Iri>, OracleTypeError> {
    let reqs = objects(graph, process, EdgeKind::RequiresCapability);
    let resources: Vec<Iri> = graph
        .nodes()
        .filter(|(_, n)| n.kind == NodeKind::Resource)
        .map(|(i, _)| i.clone())
        .collect();
    let mut out = BTreeSet::new();
    let mut error = false;
    for r in &resources {
        let caps = objects(graph, r, EdgeKind::ProvidesCapability);
        let mut all_met = true;
        for req in &reqs {
            let mut met = false;
            for cap in &caps {
                if kind_of(graph, req) != kind_of(graph, cap) {
                    continue;
                }
                let attrs = &graph.node(cap).expect("present").attrs;
                let mut ok = true;
                for (attr, op, bound) in constraints_of(graph, req) {
                    match eval_constraint(attrs, &attr, &op, &bound) {
                        Ok(b) => ok &= b,
                        Err(_) => error = true,
                    }
                }
                met |= ok;
            }
            all_met &= met;
        }
        if all_met {
            out.insert(r.clone());
        }
    }
    if error {
        Err(OracleTypeError)
    } else {
        Ok(out)
    }
}

fn resolved(graph: &AkgGraph, ctx: &ObservationContext) -> Result<BTreeSet<Iri>, OracleTypeError> {
    if let Some(r) = &ctx.observed_on_resource {
        return Ok([r.clone()].into());
    }
    let Some(step) = &ctx.affected_step else {
        return Ok(graph
            .nodes()
            .filter(|(_, n)| n.kind == NodeKind::Resource)
            .map(|(i, _)| i.clone())
            .collect());
    };
    let allocated: BTreeSet<Iri> = objects(graph, step, EdgeKind::AllocatedTo).into_iter().collect();
    if !allocated.is_empty() {
        return Ok(allocated);
    }
    let class = if graph.node(step).expect("present").kind == NodeKind::ProcessClass {
        step.clone()
    } else {
        objects(graph, step, EdgeKind::InstanceOf).pop().expect("instance has a class")
    };
    eligible(graph, &class)
}

/// Causes of `ctx` as (cause, weight), by edge scan and scope filter, sorted
/// by weight descending then IRI.
pub fn causes(graph: &AkgGraph, ctx: &ObservationContext) -> Result<Vec<(Iri, f64)>, OracleTypeError> {
    let scope = resolved(graph, ctx)?;
    let mut out = Vec::new();
    for cause in objects(graph, &ctx.condition, EdgeKind::HasPlausibleCause) {
        let definers = subjects(graph, EdgeKind::DefinesCause, &cause);
        if definers.is_empty() || definers.iter().any(|d| scope.contains(d)) {
            let w = match graph.node(&cause).expect("present").attrs.get("weight") {
                Some(v) => num(v).expect("numeric weight"),
                None => 0.5,
            };
            out.push((cause, w));
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.as_str().cmp(b.0.as_str())));
    Ok(out)
}

/// Independent feasibility check: completeness, eligibility, precedence,
/// pairwise non-overlap per resource and the stated makespan.
pub fn check_schedule(instance: &SchedulingInstance, schedule: &Schedule) -> Result<(), String> {
    let a = &schedule.assignments;
    if a.len() != instance.steps.len() {
        return Err(format!("{} assignments for {} steps", a.len(), instance.steps.len()));
    }
    for s in &instance.steps {
        let hits: Vec<_> = a.iter().filter(|x| x.step == s.step).collect();
        let [x] = hits.as_slice() else {
            return Err(format!("{} assigned {} times", s.step, hits.len()));
        };
        if x.duration_s != s.duration_s {
            return Err(format!("{} duration changed", s.step));
        }
        if !s.eligible.contains(&x.resource) {
            return Err(format!("{} on ineligible {}", s.step, x.resource));
        }
        for p in &s.predecessors {
            let y = a.iter().find(|y| &y.step == p).ok_or_else(|| format!("{p} missing"))?;
            if x.start_s < y.start_s + y.duration_s {
                return Err(format!("{} starts before {p} ends", s.step));
            }
        }
    }
    for (i, x) in a.iter().enumerate() {
        for y in &a[i + 1..] {
            let disjoint = x.start_s + x.duration_s <= y.start_s || y.start_s + y.duration_s <= x.start_s;
            if x.resource == y.resource && !disjoint {
                return Err(format!("{} and {} overlap on {}", x.step, y.step, x.resource));
            }
        }
    }
    let makespan = a.iter().map(|x| x.start_s + x.duration_s).max().unwrap_or(0);
    if makespan != schedule.makespan_s {
        return Err(format!("makespan {makespan} != stated {}", schedule.makespan_s));
    }
    Ok(())
}

/// Minimum makespan by plain enumeration: every topological order times
/// every resource assignment, each step appended at its earliest start.
/// Exponential; intended for at most six steps.
pub fn optimal_makespan(instance: &SchedulingInstance) -> u64 {
    let n = instance.steps.len();
    let idx: BTreeMap<&Iri, usize> = instance.steps.iter().enumerate().map(|(i, s)| (&s.step, i)).collect();
    let preds: Vec<Vec<usize>> = instance
        .steps
        .iter()
        .map(|s| s.predecessors.iter().map(|p| idx[p]).collect())
        .collect();
    let elig: Vec<Vec<&Iri>> = instance.steps.iter().map(|s| s.eligible.iter().collect()).collect();
    let mut best = u64::MAX;
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    permute(&preds, &mut order, &mut used, &mut |order| {
        let mut choice = vec![0usize; n];
        loop {
            let mut free: BTreeMap<&Iri, u64> = BTreeMap::new();
            let mut end = vec![0u64; n];
            for &s in order {
                let r = elig[s][choice[s]];
                let ready = preds[s].iter().map(|&p| end[p]).max().unwrap_or(0);
                let st = ready.max(*free.get(r).unwrap_or(&0));
                end[s] = st + instance.steps[s].duration_s;
                free.insert(r, end[s]);
            }
            best = best.min(end.iter().copied().max().unwrap_or(0));
            // odometer over resource choices
            let mut k = 0;
            while k < n {
                choice[k] += 1;
                if choice[k] < elig[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    });
    if n == 0 {
        0
    } else {
        best
    }
}

fn permute(preds: &[Vec<usize>], order: &mut Vec<usize>, used: &mut [bool], visit: &mut dyn FnMut(&[usize])) {
    if order.len() == preds.len() {
        visit(order);
        return;
    }
    for s in 0..preds.len() {
        if !used[s] && preds[s].iter().all(|&p| used[p]) {
            used[s] = true;
            order.push(s);
            permute(preds, order, used, visit);
            order.pop();
            used[s] = false;
        }
    }
}

/// Permitted `(predicate, subject kind, object kind)` triples, written out
/// independently of the engine's signature table.
const SIGNATURES: &[(&str, &str, &str)] = &[
    ("hasInput", "ProcessClass", "ProductClass"),
    ("hasInput", "ProcessStepInstance", "ProductInstance"),
    ("hasOutput", "ProcessClass", "ProductClass"),
    ("hasOutput", "ProcessStepInstance", "ProductInstance"),
    ("hasSuccessor", "ProcessClass", "ProcessClass"),
    ("requiresCapability", "ProcessClass", "RequiredCapability"),
    ("providesCapability", "Resource", "ProvidedCapability"),
    ("hasUndesiredCondition", "ProcessClass", "UndesiredCondition"),
    ("hasUndesiredCondition", "ProductClass", "UndesiredCondition"),
    ("hasUndesiredCondition", "Resource", "UndesiredCondition"),
    ("hasUndesiredCondition", "RequiredCapability", "UndesiredCondition"),
    ("hasPlausibleCause", "UndesiredCondition", "PlausibleCause"),
    ("definesCause", "Resource", "PlausibleCause"),
    ("affects", "UndesiredCondition", "ProcessClass"),
    ("affects", "UndesiredCondition", "ProductClass"),
    ("affects", "UndesiredCondition", "Resource"),
    ("affects", "UndesiredCondition", "RequiredCapability"),
    ("instanceOf", "ProcessStepInstance", "ProcessClass"),
    ("instanceOf", "ProductInstance", "ProductClass"),
    ("allocatedTo", "ProcessStepInstance", "Resource"),
    ("allocatedTo", "ProcessClass", "Resource"),
];

/// Typing violations in a `GET /api/graph` export: dangling endpoints,
/// unpermitted edge signatures and `hasSuccessor` cycles.
pub fn export_violations(export: &serde_json::Value) -> Vec<String> {
    let mut out = Vec::new();
    let mut kinds: BTreeMap<&str, &str> = BTreeMap::new();
    for n in export["nodes"].as_array().into_iter().flatten() {
        match (n["iri"].as_str(), n["kind"].as_str()) {
            (Some(iri), Some(kind)) => {
                kinds.insert(iri, kind);
            }
            _ => out.push(format!("malformed node {n}")),
        }
    }
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in export["edges"].as_array().into_iter().flatten() {
        let (Some(s), Some(p), Some(o)) = (e["subject"].as_str(), e["predicate"].as_str(), e["object"].as_str()) else {
            out.push(format!("malformed edge {e}"));
            continue;
        };
        match (kinds.get(s), kinds.get(o)) {
            (Some(sk), Some(ok)) if SIGNATURES.contains(&(p, *sk, *ok)) => {}
            (Some(sk), Some(ok)) => out.push(format!("{s} {p} {o}: {sk} -> {ok} not permitted")),
            _ => out.push(format!("{s} {p} {o}: dangling endpoint")),
        }
        if p == "hasSuccessor" {
            succ.entry(s).or_default().push(o);
        }
    }
    // Colour-based DFS: 1 = on stack, 2 = done.
    let mut colour: BTreeMap<&str, u8> = BTreeMap::new();
    for &root in succ.keys() {
        if colour.contains_key(root) {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour.insert(root, 1);
        while let Some((node, i)) = stack.pop() {
            let next = succ.get(node).and_then(|v| v.get(i)).copied();
            match next {
                Some(m) => {
                    stack.push((node, i + 1));
                    match colour.get(m) {
                        Some(1) => out.push(format!("hasSuccessor cycle through {m}")),
                        Some(_) => {}
                        None => {
                            colour.insert(m, 1);
                            stack.push((m, 0));
                        }
                    }
                }
                None => {
                    colour.insert(node, 2);
                }
            }
        }
    }
    out
}
