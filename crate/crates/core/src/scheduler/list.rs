use std::cmp::Reverse;

use super::Compiled;

/// Greedy list scheduling with append-only placement.
///
/// Among ready steps pick the smallest `(earliest start, -duration, step IRI)`,
/// where the earliest start accounts for predecessors and the least loaded
/// eligible resource; place it on the eligible resource with the earliest
/// finish, ties to the smaller resource IRI. Returns per-step resource and start.
pub(crate) fn list_schedule(c: &Compiled) -> (Vec<usize>, Vec<u64>) {
    let n = c.len();
    let mut avail = vec![0u64; c.res.len()];
    let mut resource = vec![usize::MAX; n];
    let mut start = vec![0u64; n];
    let mut finish = vec![0u64; n];
    let mut missing: Vec<usize> = c.preds.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&i| missing[i] == 0).collect();
    let pred_finish = |finish: &[u64], i: usize| c.preds[i].iter().map(|&p| finish[p]).max().unwrap_or(0);

    while !ready.is_empty() {
        let (pos, &s) = ready
            .iter()
            .enumerate()
            .min_by_key(|&(_, &s)| {
                let pf = pred_finish(&finish, s);
                let free = c.elig[s].iter().map(|&r| avail[r]).min().expect("non-empty");
                (pf.max(free), Reverse(c.dur[s]), c.name(s))
            })
            .expect("non-empty");
        ready.swap_remove(pos);
        let pf = pred_finish(&finish, s);
        let r = *c.elig[s]
            .iter()
            .min_by_key(|&&r| (pf.max(avail[r]) + c.dur[s], r))
            .expect("non-empty");
        resource[s] = r;
        start[s] = pf.max(avail[r]);
        finish[s] = start[s] + c.dur[s];
        avail[r] = finish[s];
        for &w in &c.succs[s] {
            missing[w] -= 1;
            if missing[w] == 0 {
                ready.push(w);
            }
        }
    }
    (resource, start)
}
