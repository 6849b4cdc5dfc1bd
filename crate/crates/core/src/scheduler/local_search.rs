use super::Compiled;

/// `(makespan, sequences, starts)` of the best neighbour seen so far.
type Candidate = Option<(u64, Vec<Vec<usize>>, Vec<u64>)>;

/// Steepest descent over per-resource sequences.
///
/// Neighbours: move one step to any position of any eligible resource's
/// sequence, or swap two steps on the same resource. Sequences contradicting
/// precedence are skipped. Only strict makespan improvements are taken.
pub(crate) fn improve(c: &Compiled, resource: &[usize], start: &[u64], max_iterations: u32) -> (Vec<usize>, Vec<u64>) {
    let mut seqs: Vec<Vec<usize>> = vec![Vec::new(); c.res.len()];
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by_key(|&i| (start[i], i));
    for i in order {
        seqs[resource[i]].push(i);
    }
    let mut best_start = c.timetable(&seqs).expect("list schedule is consistent");
    let mut best = c.makespan(&best_start);

    for _ in 0..max_iterations {
        let mut found: Candidate = None;
        let consider = |cand: Vec<Vec<usize>>, found: &mut Candidate| {
            if let Some(st) = c.timetable(&cand) {
                let m = c.makespan(&st);
                if m < found.as_ref().map_or(best, |f| f.0) {
                    *found = Some((m, cand, st));
                }
            }
        };
        for s in 0..c.len() {
            let from = resource_of(&seqs, s);
            let pos = seqs[from].iter().position(|&x| x == s).expect("present");
            let mut without = seqs.clone();
            without[from].remove(pos);
            for &r in &c.elig[s] {
                for at in 0..=without[r].len() {
                    if r == from && at == pos {
                        continue;
                    }
                    let mut cand = without.clone();
                    cand[r].insert(at, s);
                    consider(cand, &mut found);
                }
            }
        }
        for r in 0..seqs.len() {
            for i in 0..seqs[r].len() {
                for j in i + 1..seqs[r].len() {
                    let mut cand = seqs.clone();
                    cand[r].swap(i, j);
                    consider(cand, &mut found);
                }
            }
        }
        match found {
            Some((m, s, st)) => {
                best = m;
                seqs = s;
                best_start = st;
            }
            None => break,
        }
    }
    let mut res = vec![0; c.len()];
    for (r, seq) in seqs.iter().enumerate() {
        for &s in seq {
            res[s] = r;
        }
    }
    (res, best_start)
}

fn resource_of(seqs: &[Vec<usize>], step: usize) -> usize {
    seqs.iter().position(|s| s.contains(&step)).expect("every step is sequenced")
}
