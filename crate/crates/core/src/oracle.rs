//! Exact minimum-cost cover for tiny pools, by branch and bound over piece
//! bitmasks. Used as ground truth for the heuristics.

use thiserror::Error;

use crate::shiftgen::CandidatePool;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_pieces: usize,
    pub max_shifts: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_pieces: 24,
            max_shifts: 24,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("too large for oracle: {pieces} pieces, {shifts} shifts (limits {max_pieces} / {max_shifts})")]
    TooLarge {
        pieces: usize,
        shifts: usize,
        max_pieces: usize,
        max_shifts: usize,
    },
    #[error("uncoverable piece {0}")]
    Uncoverable(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimal_objective: u64,
    /// Ascending shift ids.
    pub optimal_shift_ids: Vec<usize>,
    pub nodes_explored: u64,
}

/// Finds a covering subset of the pool minimising total cost plus
/// `fixed_charge` per shift.
pub fn exact_min_cover(
    pool: &CandidatePool,
    fixed_charge: u32,
    limits: OracleLimits,
) -> Result<OracleResult, OracleError> {
    let n_pieces = pool.n_pieces();
    if n_pieces > limits.max_pieces || pool.len() > limits.max_shifts || n_pieces > 32 {
        return Err(OracleError::TooLarge {
            pieces: n_pieces,
            shifts: pool.len(),
            max_pieces: limits.max_pieces,
            max_shifts: limits.max_shifts,
        });
    }
    let costs: Vec<u64> = pool
        .shifts
        .iter()
        .map(|s| u64::from(s.cost) + u64::from(fixed_charge))
        .collect();
    let masks: Vec<u32> = pool
        .shifts
        .iter()
        .map(|s| s.pieces.iter().fold(0u32, |m, &p| m | (1 << p)))
        .collect();
    let mut by_piece = Vec::with_capacity(n_pieces);
    for (p, list) in pool.coverage.iter().enumerate() {
        if list.is_empty() {
            return Err(OracleError::Uncoverable(p));
        }
        let mut list = list.clone();
        list.sort_by_key(|&s| (costs[s], s));
        by_piece.push(list);
    }
    let full = if n_pieces == 32 {
        u32::MAX
    } else {
        (1u32 << n_pieces) - 1
    };

    let mut bb = BranchAndBound {
        costs: &costs,
        masks: &masks,
        by_piece: &by_piece,
        full,
        best: u64::MAX,
        best_set: Vec::new(),
        chosen: Vec::new(),
        nodes: 0,
    };
    bb.search(0, 0);
    let mut ids = bb.best_set;
    ids.sort_unstable();
    Ok(OracleResult {
        optimal_objective: if n_pieces == 0 { 0 } else { bb.best },
        optimal_shift_ids: ids,
        nodes_explored: bb.nodes,
    })
}

struct BranchAndBound<'a> {
    costs: &'a [u64],
    masks: &'a [u32],
    by_piece: &'a [Vec<usize>],
    full: u32,
    best: u64,
    best_set: Vec<usize>,
    chosen: Vec<usize>,
    nodes: u64,
}

impl BranchAndBound<'_> {
    fn search(&mut self, covered: u32, cost: u64) {
        self.nodes += 1;
        if covered == self.full {
            if cost < self.best {
                self.best = cost;
                self.best_set = self.chosen.clone();
            }
            return;
        }
        let piece = (!covered & self.full).trailing_zeros() as usize;
        for &s in &self.by_piece[piece] {
            let next = cost + self.costs[s];
            if next >= self.best {
                break;
            }
            self.chosen.push(s);
            self.search(covered | self.masks[s], next);
            self.chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Instance, InstanceData, ReliefOpportunity, Rules, Shift, Spell};

    fn instance() -> Instance {
        let ros = |t: &[u32]| {
            t.iter()
                .map(|&time_min| ReliefOpportunity {
                    time_min,
                    location: "D".into(),
                })
                .collect()
        };
        Instance::new(InstanceData {
            name: "o".into(),
            rules: Rules::default(),
            blocks: vec![
                Block {
                    id: "A".into(),
                    relief_opportunities: ros(&[0, 100, 200]),
                },
                Block {
                    id: "B".into(),
                    relief_opportunities: ros(&[300, 400]),
                },
            ],
        })
        .unwrap()
    }

    fn pool(inst: &Instance, spells: &[&[Spell]]) -> CandidatePool {
        let shifts = spells
            .iter()
            .map(|s| Shift::from_spells(inst, s.to_vec()))
            .collect();
        CandidatePool::from_shifts(inst, shifts).unwrap()
    }

    #[test]
    fn singleton_cover_wins() {
        let inst = instance();
        // Shift 1 covers all three pieces for 400 + 2000; any other cover
        // needs at least two shifts.
        let p = pool(
            &inst,
            &[
                &[Spell::new(0, 0, 0)],
                &[Spell::new(0, 0, 1), Spell::new(1, 0, 0)],
                &[Spell::new(0, 1, 1)],
                &[Spell::new(1, 0, 0)],
            ],
        );
        let res = exact_min_cover(&p, 2000, OracleLimits::default()).unwrap();
        assert_eq!(res.optimal_shift_ids, vec![1]);
        assert_eq!(res.optimal_objective, 2400);
    }

    #[test]
    fn disjoint_pair_wins() {
        let inst = instance();
        let p = pool(
            &inst,
            &[
                &[Spell::new(0, 0, 1)],
                &[Spell::new(1, 0, 0)],
                &[Spell::new(0, 0, 0)],
                &[Spell::new(0, 1, 1)],
            ],
        );
        let res = exact_min_cover(&p, 2000, OracleLimits::default()).unwrap();
        assert_eq!(res.optimal_shift_ids, vec![0, 1]);
        assert_eq!(res.optimal_objective, 200 + 100 + 4000);
    }

    #[test]
    fn zero_charge_prefers_cheap_pieces() {
        let inst = instance();
        // Without the fixed charge the long chained shift (spread 400) is
        // beaten by three single pieces (100 each).
        let p = pool(
            &inst,
            &[
                &[Spell::new(0, 0, 1), Spell::new(1, 0, 0)],
                &[Spell::new(0, 0, 0)],
                &[Spell::new(0, 1, 1)],
                &[Spell::new(1, 0, 0)],
            ],
        );
        let res = exact_min_cover(&p, 0, OracleLimits::default()).unwrap();
        assert_eq!(res.optimal_objective, 300);
        assert_eq!(res.optimal_shift_ids, vec![1, 2, 3]);
        let with_charge = exact_min_cover(&p, 2000, OracleLimits::default()).unwrap();
        assert_eq!(with_charge.optimal_shift_ids, vec![0]);
    }

    #[test]
    fn refuses_large_pools() {
        let inst = instance();
        let p = pool(&inst, &[&[Spell::new(0, 0, 1)], &[Spell::new(1, 0, 0)]]);
        let err = exact_min_cover(
            &p,
            2000,
            OracleLimits {
                max_pieces: 24,
                max_shifts: 1,
            },
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("too large for oracle"));
    }
}
