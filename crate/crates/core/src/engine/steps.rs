//! The individual steps of one improvement cycle.

use std::collections::BTreeMap;

use super::rng::SolverRng;
use super::schedule::Schedule;
use super::SolveError;
use crate::evaluate::{Evaluator, Presence};

/// Fitness of each shift in a schedule, keyed by shift id.
pub type FitnessMap = BTreeMap<usize, f64>;

/// Scores every shift of a complete schedule against the rest of it.
pub fn analyze(schedule: &Schedule, eval: &Evaluator<'_>) -> FitnessMap {
    schedule
        .shift_ids()
        .iter()
        .map(|&id| (id, eval.fitness(id, schedule.ctx(), Presence::Member)))
        .collect()
}

/// Outcome of the selection step.
#[derive(Debug, Clone)]
pub struct Selection {
    pub retained: Schedule,
    pub removed: Vec<usize>,
    pub p_s: f64,
}

/// Draws one threshold `p_s` for the iteration and keeps exactly the shifts
/// with fitness strictly above `p_s - p`.
pub fn select(
    schedule: &Schedule,
    fitness: &FitnessMap,
    p: f64,
    eval: &Evaluator<'_>,
    rng: &mut SolverRng,
) -> Selection {
    let p_s = rng.unit();
    select_with_threshold(schedule, fitness, p, p_s, eval)
}

pub fn select_with_threshold(
    schedule: &Schedule,
    fitness: &FitnessMap,
    p: f64,
    p_s: f64,
    eval: &Evaluator<'_>,
) -> Selection {
    let threshold = p_s - p;
    let mut retained = schedule.clone();
    let mut removed = Vec::new();
    let mut pos = 0;
    while pos < retained.len() {
        let id = retained.shift_ids()[pos];
        if fitness[&id] > threshold {
            pos += 1;
        } else {
            removed.push(retained.remove_at(eval.pool, pos));
        }
    }
    Selection {
        retained,
        removed,
        p_s,
    }
}

/// Drops each shift independently with probability `p_m`. One draw is
/// consumed per shift, in schedule order.
pub fn mutate(
    mut partial: Schedule,
    p_m: f64,
    eval: &Evaluator<'_>,
    rng: &mut SolverRng,
) -> (Schedule, Vec<usize>) {
    let mut removed = Vec::new();
    let mut pos = 0;
    while pos < partial.len() {
        if rng.chance(p_m) {
            removed.push(partial.remove_at(eval.pool, pos));
        } else {
            pos += 1;
        }
    }
    (partial, removed)
}

/// Orders removed shifts worst first (ties by id) and unrolls them into the
/// sequence of pieces to re-cover. Pieces still covered by the partial
/// schedule, or already listed, are skipped.
pub fn prioritize(
    removed: &[usize],
    fitness: &FitnessMap,
    partial: &Schedule,
    eval: &Evaluator<'_>,
) -> Vec<usize> {
    let mut order: Vec<usize> = removed.to_vec();
    order.sort_by(|a, b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(b)));
    order.dedup();
    let mut listed = vec![false; partial.ctx().counts().len()];
    let mut sequence = Vec::new();
    for id in order {
        for &p in &eval.pool.shifts[id].pieces {
            if !partial.ctx().is_covered(p) && !listed[p] {
                listed[p] = true;
                sequence.push(p);
            }
        }
    }
    sequence
}

/// Picks the `k` best candidates by descending fitness, ties to the lower
/// id. Candidates must arrive in ascending id order.
fn top_k(candidates: impl Iterator<Item = (usize, f64)>, k: usize, out: &mut Vec<(usize, f64)>) {
    out.clear();
    for (id, f) in candidates {
        if out.len() == k && f <= out[k - 1].1 {
            continue;
        }
        let at = out.partition_point(|&(_, g)| g >= f);
        out.insert(at, (id, f));
        out.truncate(k);
    }
}

/// Greedy repair. For each still-uncovered piece of `sequence`, in order,
/// scores every shift in its coverage list against the current partial
/// schedule and adds one chosen uniformly among the `k` best.
pub fn construct(
    mut partial: Schedule,
    sequence: &[usize],
    k: usize,
    eval: &Evaluator<'_>,
    rng: &mut SolverRng,
) -> Result<Schedule, SolveError> {
    let k = k.max(1);
    let mut best = Vec::with_capacity(k);
    for &piece in sequence {
        if partial.ctx().is_covered(piece) {
            continue;
        }
        let list = &eval.pool.coverage[piece];
        if list.is_empty() {
            return Err(SolveError::EmptyCoverage { piece });
        }
        top_k(
            list.iter()
                .map(|&id| (id, eval.fitness(id, partial.ctx(), Presence::Candidate))),
            k,
            &mut best,
        );
        let pick = if best.len() > 1 {
            rng.below(best.len())
        } else {
            0
        };
        partial.add(eval.pool, best[pick].0);
    }
    Ok(partial)
}

/// Repeatedly drops the lowest-fitness shift whose pieces are all covered
/// by other shifts, until no such shift is left.
pub fn remove_redundant(mut schedule: Schedule, eval: &Evaluator<'_>) -> Schedule {
    loop {
        let mut worst: Option<(usize, usize, f64)> = None;
        for (pos, &id) in schedule.shift_ids().iter().enumerate() {
            let shift = &eval.pool.shifts[id];
            if !shift.pieces.iter().all(|&p| schedule.ctx().count(p) >= 2) {
                continue;
            }
            let f = eval.fitness(id, schedule.ctx(), Presence::Member);
            let better = match worst {
                None => true,
                Some((_, wid, wf)) => f < wf || (f == wf && id < wid),
            };
            if better {
                worst = Some((pos, id, f));
            }
        }
        match worst {
            Some((pos, _, _)) => {
                schedule.remove_at(eval.pool, pos);
            }
            None => return schedule,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_k_prefers_high_then_low_id() {
        let mut out = Vec::new();
        top_k(
            [(0, 0.5), (1, 0.9), (2, 0.5), (3, 0.9), (4, 0.1)].into_iter(),
            2,
            &mut out,
        );
        assert_eq!(out, vec![(1, 0.9), (3, 0.9)]);
        top_k([(0, 0.5), (1, 0.5), (2, 0.5)].into_iter(), 2, &mut out);
        assert_eq!(out, vec![(0, 0.5), (1, 0.5)]);
        top_k([(5, 0.2)].into_iter(), 3, &mut out);
        assert_eq!(out, vec![(5, 0.2)]);
        top_k([(0, 0.1), (1, 0.3), (2, 0.2)].into_iter(), 1, &mut out);
        assert_eq!(out, vec![(1, 0.3)]);
    }
}
