//! Search: the improved squeaky wheel loop, the classic squeaky wheel
//! baseline, greedy initialisation and redundancy elimination.

mod rng;
mod schedule;
mod solve;
mod steps;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rng::SolverRng;
pub use schedule::Schedule;
pub use solve::{initial_greedy, solve_iswo, solve_swo, Algorithm, SolveResult};
pub use steps::{
    analyze, construct, mutate, prioritize, remove_redundant, select, select_with_threshold,
    FitnessMap, Selection,
};

use crate::evaluate::{EvalError, Evaluator, Weights, DEFAULT_FIXED_CHARGE};
use crate::lp::{fractional_cover, FractionalCover, LpError};
use crate::model::Instance;
use crate::shiftgen::{enumerate_shifts, CandidatePool, ShiftGenError, ShiftGenOptions};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    ShiftGen(#[from] ShiftGenError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("piece {piece} has an empty coverage list")]
    EmptyCoverage { piece: usize },
}

/// Solver tunables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub weights: Weights,
    /// Offset subtracted from the per-iteration selection threshold.
    pub p: f64,
    /// Mutation rate.
    pub p_m: f64,
    /// Construction chooses among this many best candidates.
    pub k: usize,
    pub fixed_charge: u32,
    /// Iterations without improvement before stopping.
    pub stagnation_limit: u64,
    pub max_iterations: Option<u64>,
    pub seed: u64,
    pub use_lp: bool,
    pub redundancy_pass: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            p: 0.3,
            p_m: 0.05,
            k: 2,
            fixed_charge: DEFAULT_FIXED_CHARGE,
            stagnation_limit: 1000,
            max_iterations: None,
            seed: 0,
            use_lp: true,
            redundancy_pass: true,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::Params(m.to_string()));
        if !(0.0..=1.0).contains(&self.p) {
            return bad("p must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.p_m) {
            return bad("p_m must lie in [0, 1]");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.stagnation_limit == 0 {
            return bad("stagnation_limit must be at least 1");
        }
        Ok(())
    }

    /// Weights actually used: the fractional criterion is dropped when the
    /// LP is off.
    pub fn effective_weights(&self) -> Result<Weights, SolveError> {
        if self.use_lp {
            Ok(self.weights)
        } else {
            Ok(self.weights.without_fractional()?)
        }
    }
}

/// One row of the search trace. Row 0 describes the initial solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iteration: u64,
    /// Selection threshold draw; absent for the baseline and row 0.
    pub p_s: Option<f64>,
    pub removed_select: usize,
    pub removed_mutate: usize,
    pub objective: u64,
    pub best_objective: u64,
}

/// An instance with its candidate pool and LP relaxation, shared read-only
/// by any number of solves.
#[derive(Debug, Clone)]
pub struct Problem {
    pub instance: Instance,
    pub pool: CandidatePool,
    pub frac: FractionalCover,
}

impl Problem {
    pub fn build(instance: Instance, fixed_charge: u32, use_lp: bool) -> Result<Self, SolveError> {
        let pool = enumerate_shifts(&instance, ShiftGenOptions::default())?;
        Self::from_pool(instance, pool, fixed_charge, use_lp)
    }

    pub fn from_pool(
        instance: Instance,
        pool: CandidatePool,
        fixed_charge: u32,
        use_lp: bool,
    ) -> Result<Self, SolveError> {
        let frac = if use_lp {
            fractional_cover(&pool, fixed_charge)?
        } else {
            FractionalCover::empty(pool.len())
        };
        Ok(Self {
            instance,
            pool,
            frac,
        })
    }

    pub fn evaluator(&self, params: &Params) -> Result<Evaluator<'_>, SolveError> {
        let weights = params.effective_weights()?;
        Ok(Evaluator::new(
            &self.instance,
            &self.pool,
            &weights,
            &self.frac,
        ))
    }
}
