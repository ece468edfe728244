use crate::evaluate::CoverageContext;
use crate::shiftgen::CandidatePool;

/// A multiset of pool shifts with cached piece coverage and objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    shift_ids: Vec<usize>,
    ctx: CoverageContext,
    objective: u64,
    fixed_charge: u32,
}

impl Schedule {
    pub fn empty(n_pieces: usize, fixed_charge: u32) -> Self {
        Self {
            shift_ids: Vec::new(),
            ctx: CoverageContext::new(n_pieces),
            objective: 0,
            fixed_charge,
        }
    }

    pub fn from_ids(pool: &CandidatePool, ids: &[usize], fixed_charge: u32) -> Self {
        let mut s = Self::empty(pool.n_pieces(), fixed_charge);
        for &id in ids {
            s.add(pool, id);
        }
        s
    }

    pub fn add(&mut self, pool: &CandidatePool, id: usize) {
        let shift = &pool.shifts[id];
        self.ctx.add(shift);
        self.objective += u64::from(shift.cost) + u64::from(self.fixed_charge);
        self.shift_ids.push(id);
    }

    /// Removes the shift at `pos`, keeping the order of the rest.
    pub fn remove_at(&mut self, pool: &CandidatePool, pos: usize) -> usize {
        let id = self.shift_ids.remove(pos);
        let shift = &pool.shifts[id];
        self.ctx.remove(shift);
        self.objective -= u64::from(shift.cost) + u64::from(self.fixed_charge);
        id
    }

    pub fn shift_ids(&self) -> &[usize] {
        &self.shift_ids
    }

    pub fn ctx(&self) -> &CoverageContext {
        &self.ctx
    }

    pub fn objective(&self) -> u64 {
        self.objective
    }

    pub fn fixed_charge(&self) -> u32 {
        self.fixed_charge
    }

    pub fn len(&self) -> usize {
        self.shift_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shift_ids.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.ctx.is_complete()
    }

    /// Total cost without the fixed charges.
    pub fn total_cost(&self, pool: &CandidatePool) -> u64 {
        self.shift_ids
            .iter()
            .map(|&id| u64::from(pool.shifts[id].cost))
            .sum()
    }

    /// Recounts coverage and objective from the shift list.
    pub fn is_consistent(&self, pool: &CandidatePool) -> bool {
        let fresh = Self::from_ids(pool, &self.shift_ids, self.fixed_charge);
        fresh.ctx == self.ctx && fresh.objective == self.objective
    }

    /// Ids in ascending order.
    pub fn sorted_ids(&self) -> Vec<usize> {
        let mut ids = self.shift_ids.clone();
        ids.sort_unstable();
        ids
    }
}
