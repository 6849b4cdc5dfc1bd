//! Makespan scheduling of run steps onto eligible unit-capacity resources.
//!
//! [`build_instance`] turns production runs into a [`SchedulingInstance`];
//! [`schedule`] solves it with list scheduling plus optional local search;
//! [`brute_force_schedule`] is the exact solver for small instances;
//! [`commit_schedule`] writes assignments back into the graph.

mod brute;
mod list;
mod local_search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attr::AttrValue;
use crate::graph::{AkgGraph, Direction, EdgeKind, GraphError, NodeKind};
use crate::iri::Iri;
use crate::matchmaker::{eligible_resources, process_of, MatchError};
use crate::run::ProcessRun;
use crate::vocab;

pub use brute::{brute_force_schedule, BRUTE_FORCE_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedStep {
    pub step: Iri,
    pub duration_s: u64,
    pub eligible: BTreeSet<Iri>,
    pub predecessors: BTreeSet<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulingInstance {
    pub steps: Vec<SchedStep>,
    pub resources: BTreeSet<Iri>,
    /// Graph eligibility token the instance was built against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eligibility_token: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulePolicy {
    pub improve: bool,
    pub max_iterations: u32,
    /// Reserved; the policy is deterministic.
    pub seed: u64,
}

impl Default for SchedulePolicy {
    fn default() -> Self {
        SchedulePolicy {
            improve: false,
            max_iterations: 1000,
            seed: 0,
        }
    }
}

impl SchedulePolicy {
    pub fn improving() -> Self {
        SchedulePolicy {
            improve: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub step: Iri,
    pub resource: Iri,
    pub start_s: u64,
    pub duration_s: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// Sorted by `(start_s, step)`.
    pub assignments: Vec<Assignment>,
    pub makespan_s: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eligibility_token: Option<u64>,
}

impl Schedule {
    pub fn assignment(&self, step: &Iri) -> Option<&Assignment> {
        self.assignments.iter().find(|a| &a.step == step)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error("step <{0}> has no eligible resource")]
    StarvedStep(Iri),
    #[error("invalid scheduling instance: {0}")]
    InvalidInstance(String),
    #[error("instance has {steps} steps; exhaustive search is limited to {limit}")]
    InstanceTooLarge { steps: usize, limit: usize },
    #[error("schedule was computed against eligibility token {expected:?}, graph is at {found}")]
    StaleSchedule { expected: Option<u64>, found: u64 },
    #[error("infeasible schedule: {0}")]
    Infeasible(String),
}

impl SchedulingInstance {
    /// Checks the structural invariants: unique steps, durations of at least 1,
    /// non-empty eligible sets within `resources`, known and acyclic predecessors.
    pub fn check(&self) -> Result<(), ScheduleError> {
        Compiled::new(self).map(|_| ())
    }
}

/// Index-based view of an instance. Steps keep instance order, resources are sorted.
#[derive(Debug, Clone)]
pub(crate) struct Compiled<'a> {
    pub inst: &'a SchedulingInstance,
    pub res: Vec<&'a Iri>,
    pub dur: Vec<u64>,
    /// Eligible resource indices, ascending.
    pub elig: Vec<Vec<usize>>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    pub topo: Vec<usize>,
}

impl<'a> Compiled<'a> {
    pub fn new(inst: &'a SchedulingInstance) -> Result<Self, ScheduleError> {
        let invalid = |m: String| Err(ScheduleError::InvalidInstance(m));
        let res: Vec<&Iri> = inst.resources.iter().collect();
        let res_index: BTreeMap<&Iri, usize> = res.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let mut step_index = BTreeMap::new();
        for (i, s) in inst.steps.iter().enumerate() {
            if step_index.insert(&s.step, i).is_some() {
                return invalid(format!("duplicate step <{}>", s.step));
            }
        }
        let n = inst.steps.len();
        let mut dur = Vec::with_capacity(n);
        let mut elig = Vec::with_capacity(n);
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for (i, s) in inst.steps.iter().enumerate() {
            if s.duration_s == 0 {
                return invalid(format!("step <{}> has zero duration", s.step));
            }
            if s.eligible.is_empty() {
                return Err(ScheduleError::StarvedStep(s.step.clone()));
            }
            let mut e = Vec::with_capacity(s.eligible.len());
            for r in &s.eligible {
                match res_index.get(r) {
                    Some(&ri) => e.push(ri),
                    None => return invalid(format!("step <{}> lists unknown resource <{r}>", s.step)),
                }
            }
            dur.push(s.duration_s);
            elig.push(e);
            for p in &s.predecessors {
                match step_index.get(p) {
                    Some(&pi) => {
                        preds[i].push(pi);
                        succs[pi].push(i);
                    }
                    None => return invalid(format!("step <{}> lists unknown predecessor <{p}>", s.step)),
                }
            }
        }
        // Kahn
        let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = queue.pop() {
            topo.push(v);
            for &w in &succs[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        if topo.len() != n {
            return invalid("precedence relation has a cycle".into());
        }
        Ok(Compiled {
            inst,
            res,
            dur,
            elig,
            preds,
            succs,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.dur.len()
    }

    pub fn name(&self, step: usize) -> &'a Iri {
        &self.inst.steps[step].step
    }

    /// Builds the public schedule from per-step resource and start.
    pub fn to_schedule(&self, resource: &[usize], start: &[u64]) -> Schedule {
        let mut assignments: Vec<Assignment> = (0..self.len())
            .map(|i| Assignment {
                step: self.name(i).clone(),
                resource: self.res[resource[i]].clone(),
                start_s: start[i],
                duration_s: self.dur[i],
            })
            .collect();
        assignments.sort_by(|a, b| (a.start_s, &a.step).cmp(&(b.start_s, &b.step)));
        Schedule {
            makespan_s: (0..self.len()).map(|i| start[i] + self.dur[i]).max().unwrap_or(0),
            assignments,
            eligibility_token: self.inst.eligibility_token,
        }
    }

    /// Semi-active timetable of per-resource step sequences: every step starts
    /// at the latest finish of its predecessors and its resource predecessor.
    /// `None` when the sequences contradict precedence.
    pub fn timetable(&self, sequences: &[Vec<usize>]) -> Option<Vec<u64>> {
        let n = self.len();
        let mut machine_pred = vec![usize::MAX; n];
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        for seq in sequences {
            for w in seq.windows(2) {
                machine_pred[w[1]] = w[0];
                indeg[w[1]] += 1;
            }
        }
        let mut machine_succ = vec![usize::MAX; n];
        for (v, &p) in machine_pred.iter().enumerate() {
            if p != usize::MAX {
                machine_succ[p] = v;
            }
        }
        let mut start = vec![0u64; n];
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            let finish = start[v] + self.dur[v];
            let ms = machine_succ[v];
            for &w in self.succs[v].iter().chain((ms != usize::MAX).then_some(&ms)) {
                start[w] = start[w].max(finish);
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        (seen == n).then_some(start)
    }

    pub fn makespan(&self, start: &[u64]) -> u64 {
        start.iter().zip(&self.dur).map(|(s, d)| s + d).max().unwrap_or(0)
    }
}

/// Deterministic heuristic schedule: list scheduling, then local search if `policy.improve`.
pub fn schedule(instance: &SchedulingInstance, policy: &SchedulePolicy) -> Result<Schedule, ScheduleError> {
    let c = Compiled::new(instance)?;
    let (resource, start) = list::list_schedule(&c);
    if !policy.improve {
        return Ok(c.to_schedule(&resource, &start));
    }
    let (resource, start) = local_search::improve(&c, &resource, &start, policy.max_iterations);
    Ok(c.to_schedule(&resource, &start))
}

/// Checks the three feasibility clauses and the makespan of `schedule` against `instance`.
pub fn verify_schedule(instance: &SchedulingInstance, schedule: &Schedule) -> Result<(), ScheduleError> {
    let bad = |m: String| Err(ScheduleError::Infeasible(m));
    let by_step: BTreeMap<&Iri, &Assignment> = schedule.assignments.iter().map(|a| (&a.step, a)).collect();
    if by_step.len() != schedule.assignments.len() {
        return bad("a step is assigned more than once".into());
    }
    if by_step.len() != instance.steps.len() {
        return bad(format!("{} assignments for {} steps", by_step.len(), instance.steps.len()));
    }
    let mut makespan = 0;
    let mut lanes: BTreeMap<&Iri, Vec<(u64, u64, &Iri)>> = BTreeMap::new();
    for s in &instance.steps {
        let Some(a) = by_step.get(&s.step) else {
            return bad(format!("step <{}> is not assigned", s.step));
        };
        if a.duration_s != s.duration_s {
            return bad(format!("step <{}> has duration {} instead of {}", s.step, a.duration_s, s.duration_s));
        }
        if !s.eligible.contains(&a.resource) {
            return bad(format!("<{}> is not eligible for step <{}>", a.resource, s.step));
        }
        for p in &s.predecessors {
            let Some(pa) = by_step.get(p) else {
                return bad(format!("predecessor <{p}> is not assigned"));
            };
            if a.start_s < pa.start_s + pa.duration_s {
                return bad(format!("step <{}> starts before predecessor <{p}> finishes", s.step));
            }
        }
        makespan = makespan.max(a.start_s + a.duration_s);
        lanes.entry(&a.resource).or_default().push((a.start_s, a.start_s + a.duration_s, &a.step));
    }
    for (r, lane) in &mut lanes {
        lane.sort();
        for w in lane.windows(2) {
            if w[1].0 < w[0].1 {
                return bad(format!("<{}> and <{}> overlap on <{r}>", w[0].2, w[1].2));
            }
        }
    }
    if makespan != schedule.makespan_s {
        return bad(format!("makespan is {makespan}, schedule states {}", schedule.makespan_s));
    }
    Ok(())
}

fn duration_of(graph: &AkgGraph, process: &Iri) -> u64 {
    graph
        .node(process)
        .and_then(|n| n.attr(vocab::DURATION_S))
        .and_then(|v| v.as_number())
        .and_then(|n| n.as_u64())
        .unwrap_or(vocab::DEFAULT_DURATION_S)
}

/// One scheduling step per step instance of `runs`. Precedence comes from
/// class-level `hasSuccessor` within each run; runs are independent.
pub fn build_instance(graph: &AkgGraph, runs: &[ProcessRun]) -> Result<SchedulingInstance, ScheduleError> {
    let mut eligible_by_class: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    let mut steps = Vec::new();
    for run in runs {
        let mut class_to_step: BTreeMap<Iri, &Iri> = BTreeMap::new();
        let mut classes = Vec::with_capacity(run.steps.len());
        for step in &run.steps {
            graph.expect_kind(step, &[NodeKind::ProcessStepInstance])?;
            let class = process_of(graph, step)?;
            class_to_step.insert(class.clone(), step);
            classes.push(class);
        }
        for (step, class) in run.steps.iter().zip(&classes) {
            if !eligible_by_class.contains_key(class) {
                let e = eligible_resources(graph, class)?.eligible.into_iter().collect();
                eligible_by_class.insert(class.clone(), e);
            }
            let eligible = eligible_by_class[class].clone();
            if eligible.is_empty() {
                return Err(ScheduleError::StarvedStep(step.clone()));
            }
            let predecessors = graph
                .adjacent(class, EdgeKind::HasSuccessor, Direction::In)
                .filter_map(|p| class_to_step.get(p).map(|s| (*s).clone()))
                .collect();
            steps.push(SchedStep {
                step: step.clone(),
                duration_s: duration_of(graph, class),
                eligible,
                predecessors,
            });
        }
    }
    let instance = SchedulingInstance {
        steps,
        resources: graph.nodes_of_kind(NodeKind::Resource).cloned().collect(),
        eligibility_token: Some(graph.eligibility_token()),
    };
    instance.check()?;
    Ok(instance)
}

/// Writes each assignment as the step's sole `allocatedTo` edge plus
/// `start_s`/`duration_s` attributes. Idempotent. Fails without mutating
/// when the graph's eligibility token differs from the schedule's.
pub fn commit_schedule(graph: &mut AkgGraph, schedule: &Schedule) -> Result<(), ScheduleError> {
    let found = graph.eligibility_token();
    if schedule.eligibility_token != Some(found) {
        return Err(ScheduleError::StaleSchedule {
            expected: schedule.eligibility_token,
            found,
        });
    }
    for a in &schedule.assignments {
        graph.expect_kind(&a.step, &[NodeKind::ProcessStepInstance])?;
        graph.expect_kind(&a.resource, &[NodeKind::Resource])?;
        i64::try_from(a.start_s.max(a.duration_s))
            .map_err(|_| ScheduleError::Infeasible(format!("time value out of range for <{}>", a.step)))?;
    }
    for a in &schedule.assignments {
        for old in graph.neighbors(&a.step, EdgeKind::AllocatedTo, Direction::Out)? {
            if old != a.resource {
                graph.remove_edge(&a.step, EdgeKind::AllocatedTo, &old)?;
            }
        }
        graph.add_edge(&a.step, EdgeKind::AllocatedTo, &a.resource)?;
        graph.set_attr(&a.step, vocab::START_S, Some(AttrValue::int(a.start_s as i64)))?;
        graph.set_attr(&a.step, vocab::DURATION_S, Some(AttrValue::int(a.duration_s as i64)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matchmaker::{apply_capability_change, CapabilityAction};

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://x/{s}")).unwrap()
    }

    fn ex(s: &str) -> Iri {
        Iri::new(format!("http://ex.org/{s}")).unwrap()
    }

    pub(crate) fn step(name: &str, d: u64, elig: &[&str], preds: &[&str]) -> SchedStep {
        SchedStep {
            step: iri(name),
            duration_s: d,
            eligible: elig.iter().map(|r| iri(r)).collect(),
            predecessors: preds.iter().map(|p| iri(p)).collect(),
        }
    }

    pub(crate) fn instance(steps: Vec<SchedStep>, resources: &[&str]) -> SchedulingInstance {
        SchedulingInstance {
            steps,
            resources: resources.iter().map(|r| iri(r)).collect(),
            eligibility_token: None,
        }
    }

    #[test]
    fn single_step() {
        let inst = instance(vec![step("A", 5, &["R"], &[])], &["R"]);
        let s = schedule(&inst, &SchedulePolicy::default()).unwrap();
        assert_eq!(s.makespan_s, 5);
        assert_eq!(s.assignments[0].start_s, 0);
        assert_eq!(brute_force_schedule(&inst).unwrap().makespan_s, 5);
    }

    #[test]
    fn parallel_placement() {
        let inst = instance(
            vec![step("A", 3, &["R1", "R2"], &[]), step("B", 3, &["R1", "R2"], &[])],
            &["R1", "R2"],
        );
        let s = schedule(&inst, &SchedulePolicy::default()).unwrap();
        assert_eq!(s.makespan_s, 3);
        verify_schedule(&inst, &s).unwrap();
    }

    #[test]
    fn serial_chain_brute_force() {
        let inst = instance(vec![step("A", 2, &["R"], &[]), step("B", 3, &["R"], &["A"])], &["R"]);
        assert_eq!(brute_force_schedule(&inst).unwrap().makespan_s, 5);
    }

    #[test]
    fn too_large_for_brute_force() {
        let steps = (0..9).map(|i| step(&format!("S{i}"), 1, &["R"], &[])).collect();
        assert_eq!(
            brute_force_schedule(&instance(steps, &["R"])),
            Err(ScheduleError::InstanceTooLarge { steps: 9, limit: 8 })
        );
    }

    #[test]
    fn invalid_instances() {
        let cyclic = instance(vec![step("A", 1, &["R"], &["B"]), step("B", 1, &["R"], &["A"])], &["R"]);
        assert!(matches!(cyclic.check(), Err(ScheduleError::InvalidInstance(_))));
        let starved = instance(vec![step("A", 1, &[], &[])], &["R"]);
        assert_eq!(starved.check(), Err(ScheduleError::StarvedStep(iri("A"))));
        let zero = instance(vec![step("A", 0, &["R"], &[])], &["R"]);
        assert!(zero.check().is_err());
        let unknown = instance(vec![step("A", 1, &["Q"], &[])], &["R"]);
        assert!(unknown.check().is_err());
    }

    #[test]
    fn list_scheduling_tie_breaks() {
        // both ready at 0: longer first, then lexicographic
        let inst = instance(
            vec![step("B", 2, &["R"], &[]), step("A", 2, &["R"], &[]), step("C", 3, &["R"], &[])],
            &["R"],
        );
        let s = schedule(&inst, &SchedulePolicy::default()).unwrap();
        let order: Vec<&str> = s.assignments.iter().map(|a| a.step.local_name()).collect();
        assert_eq!(order, vec!["C", "A", "B"]);
    }

    #[test]
    fn local_search_fixes_a_greedy_trap() {
        // Greedy puts the long step L on R1 (earliest finish ties -> R1), leaving
        // the R1-only step X to wait; moving L to R2 is optimal.
        let inst = instance(
            vec![step("L", 4, &["R1", "R2"], &[]), step("X", 4, &["R1"], &["Y"]), step("Y", 1, &["R2"], &[])],
            &["R1", "R2"],
        );
        let plain = schedule(&inst, &SchedulePolicy::default()).unwrap();
        let better = schedule(&inst, &SchedulePolicy::improving()).unwrap();
        let opt = brute_force_schedule(&inst).unwrap();
        verify_schedule(&inst, &plain).unwrap();
        verify_schedule(&inst, &better).unwrap();
        verify_schedule(&inst, &opt).unwrap();
        assert!(better.makespan_s <= plain.makespan_s);
        assert_eq!(better.makespan_s, opt.makespan_s);
    }

    #[test]
    fn verifier_rejects_overlap_and_ineligible() {
        let inst = instance(vec![step("A", 2, &["R"], &[]), step("B", 2, &["R"], &[])], &["R", "Q"]);
        let mut s = schedule(&inst, &SchedulePolicy::default()).unwrap();
        verify_schedule(&inst, &s).unwrap();
        s.assignments[1].start_s = 1;
        s.makespan_s = 3;
        assert!(verify_schedule(&inst, &s).is_err());
        s.assignments[1].start_s = 2;
        s.assignments[1].resource = iri("Q");
        s.makespan_s = 4;
        assert!(verify_schedule(&inst, &s).is_err());
    }

    #[test]
    fn build_from_runs() {
        let mut g = fixtures::demo();
        let runs = crate::instantiate_run_at(&mut g, &ex("CellModule"), 2, 0).unwrap();
        let inst = build_instance(&g, &runs).unwrap();
        assert_eq!(inst.steps.len(), 10);
        let unscrew1 = inst.steps.iter().find(|s| s.step == runs[0].steps[2]).unwrap();
        assert_eq!(unscrew1.predecessors, BTreeSet::from([runs[0].steps[1].clone()]));
        assert_eq!(unscrew1.duration_s, 5);
        assert_eq!(unscrew1.eligible, BTreeSet::from([ex("Robot2")]));
        // no cross-run precedence
        for s in &inst.steps[5..] {
            assert!(s.predecessors.iter().all(|p| runs[1].steps.contains(p)));
        }
        let s = schedule(&inst, &SchedulePolicy::improving()).unwrap();
        verify_schedule(&inst, &s).unwrap();
    }

    #[test]
    fn starved_step_after_capability_removal() {
        let mut g = fixtures::demo();
        let runs = crate::instantiate_run_at(&mut g, &ex("CellModule"), 1, 0).unwrap();
        apply_capability_change(&mut g, &ex("Robot2"), &ex("Robot2Screwdriver"), CapabilityAction::Remove).unwrap();
        assert_eq!(build_instance(&g, &runs), Err(ScheduleError::StarvedStep(runs[0].steps[2].clone())));
    }

    #[test]
    fn commit_is_idempotent_and_token_checked() {
        let mut g = fixtures::demo();
        let runs = crate::instantiate_run_at(&mut g, &ex("CellModule"), 1, 0).unwrap();
        let inst = build_instance(&g, &runs).unwrap();
        let s = schedule(&inst, &SchedulePolicy::default()).unwrap();
        commit_schedule(&mut g, &s).unwrap();
        let after_first = g.clone();
        commit_schedule(&mut g, &s).unwrap();
        assert_eq!(g, after_first);
        let unscrew = &runs[0].steps[2];
        assert_eq!(g.neighbors(unscrew, EdgeKind::AllocatedTo, Direction::Out).unwrap(), vec![ex("Robot2")]);
        assert_eq!(g.node(unscrew).unwrap().attr(vocab::DURATION_S), Some(&AttrValue::int(5)));

        apply_capability_change(&mut g, &ex("Robot1"), &ex("Robot1Gripper"), CapabilityAction::Remove).unwrap();
        let before = g.clone();
        assert!(matches!(commit_schedule(&mut g, &s), Err(ScheduleError::StaleSchedule { .. })));
        assert_eq!(g, before);
    }

    #[test]
    fn json_shape() {
        let inst = instance(vec![step("A", 5, &["R"], &[])], &["R"]);
        let s = schedule(&inst, &SchedulePolicy::default()).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "assignments": [{"step": "http://x/A", "resource": "http://x/R", "start_s": 0, "duration_s": 5}],
                "makespan_s": 5
            })
        );
    }
}
