use super::{Compiled, Schedule, ScheduleError, SchedulingInstance};

pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Exact minimum-makespan schedule by depth-first branch and bound.
///
/// Branches append a ready step to an eligible resource at its earliest
/// start. Starts are kept non-decreasing along a branch: every semi-active
/// schedule is reached by appending steps in start order, so this restriction
/// keeps the search exact.
pub fn brute_force_schedule(instance: &SchedulingInstance) -> Result<Schedule, ScheduleError> {
    let n = instance.steps.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(ScheduleError::InstanceTooLarge {
            steps: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let c = Compiled::new(instance)?;
    let mut tail = vec![0u64; n];
    for &v in c.topo.iter().rev() {
        tail[v] = c.dur[v] + c.succs[v].iter().map(|&w| tail[w]).max().unwrap_or(0);
    }
    let mut search = Search {
        c: &c,
        tail,
        avail: vec![0; c.res.len()],
        resource: vec![usize::MAX; n],
        start: vec![0; n],
        done: vec![false; n],
        best: u64::MAX,
        best_resource: Vec::new(),
        best_start: Vec::new(),
    };
    search.dfs(0, 0, 0);
    Ok(c.to_schedule(&search.best_resource, &search.best_start))
}

struct Search<'c, 'a> {
    c: &'c Compiled<'a>,
    tail: Vec<u64>,
    avail: Vec<u64>,
    resource: Vec<usize>,
    start: Vec<u64>,
    done: Vec<bool>,
    best: u64,
    best_resource: Vec<usize>,
    best_start: Vec<u64>,
}

impl Search<'_, '_> {
    fn finish(&self, s: usize) -> u64 {
        self.start[s] + self.c.dur[s]
    }

    fn lower_bound(&self, makespan: u64) -> u64 {
        let c = self.c;
        let mut lb = makespan;
        let mut remaining = 0;
        for s in (0..c.len()).filter(|&s| !self.done[s]) {
            let pf = c.preds[s].iter().filter(|&&p| self.done[p]).map(|&p| self.finish(p)).max().unwrap_or(0);
            let free = c.elig[s].iter().map(|&r| self.avail[r]).min().expect("non-empty");
            lb = lb.max(pf.max(free) + self.tail[s]);
            remaining += c.dur[s];
        }
        let load: u64 = self.avail.iter().sum::<u64>() + remaining;
        let r = self.avail.len() as u64;
        lb.max(load.div_ceil(r))
    }

    fn dfs(&mut self, placed: usize, makespan: u64, last_start: u64) {
        let c = self.c;
        if placed == c.len() {
            if makespan < self.best {
                self.best = makespan;
                self.best_resource = self.resource.clone();
                self.best_start = self.start.clone();
            }
            return;
        }
        if self.lower_bound(makespan) >= self.best {
            return;
        }
        for s in 0..c.len() {
            if self.done[s] || c.preds[s].iter().any(|&p| !self.done[p]) {
                continue;
            }
            let pf = c.preds[s].iter().map(|&p| self.finish(p)).max().unwrap_or(0);
            for &r in &c.elig[s] {
                let st = pf.max(self.avail[r]);
                if st < last_start {
                    continue;
                }
                let prev = self.avail[r];
                self.done[s] = true;
                self.resource[s] = r;
                self.start[s] = st;
                self.avail[r] = st + c.dur[s];
                self.dfs(placed + 1, makespan.max(st + c.dur[s]), st);
                self.avail[r] = prev;
                self.done[s] = false;
            }
        }
    }
}
