use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rng::SolverRng;
use super::schedule::Schedule;
use super::steps::{analyze, construct, mutate, prioritize, remove_redundant, select};
use super::{IterationTrace, Params, Problem, SolveError};
use crate::evaluate::Evaluator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Iswo,
    Swo,
    Greedy,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Iswo => "iswo",
            Self::Swo => "swo",
            Self::Greedy => "greedy",
        }
    }

    pub fn run(self, problem: &Problem, params: &Params) -> Result<SolveResult, SolveError> {
        match self {
            Self::Iswo => solve_iswo(problem, params),
            Self::Swo => solve_swo(problem, params),
            Self::Greedy => solve_greedy(problem, params),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iswo" => Ok(Self::Iswo),
            "swo" => Ok(Self::Swo),
            "greedy" => Ok(Self::Greedy),
            other => Err(format!("unknown algorithm {other:?} (iswo, swo, greedy)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub best: Schedule,
    pub initial_objective: u64,
    pub trace: Vec<IterationTrace>,
    pub iterations_run: u64,
}

/// Builds a complete schedule from scratch, visiting pieces in id order,
/// then strips redundant shifts.
pub fn initial_greedy(
    eval: &Evaluator<'_>,
    params: &Params,
    rng: &mut SolverRng,
) -> Result<Schedule, SolveError> {
    let empty = Schedule::empty(eval.pool.n_pieces(), params.fixed_charge);
    let sequence: Vec<usize> = (0..eval.pool.n_pieces()).collect();
    let schedule = construct(empty, &sequence, params.k, eval, rng)?;
    Ok(remove_redundant(schedule, eval))
}

struct Progress {
    best: Schedule,
    initial_objective: u64,
    trace: Vec<IterationTrace>,
    iteration: u64,
    stagnant: u64,
}

impl Progress {
    fn start(initial: Schedule) -> Self {
        let objective = initial.objective();
        Self {
            trace: vec![IterationTrace {
                iteration: 0,
                p_s: None,
                removed_select: 0,
                removed_mutate: 0,
                objective,
                best_objective: objective,
            }],
            best: initial,
            initial_objective: objective,
            iteration: 0,
            stagnant: 0,
        }
    }

    fn running(&self, params: &Params) -> bool {
        self.stagnant < params.stagnation_limit
            && params.max_iterations.is_none_or(|m| self.iteration < m)
    }

    fn record(&mut self, current: &Schedule, p_s: Option<f64>, removed: (usize, usize)) {
        if current.objective() < self.best.objective() {
            self.best = current.clone();
            self.stagnant = 0;
        } else {
            self.stagnant += 1;
        }
        self.trace.push(IterationTrace {
            iteration: self.iteration,
            p_s,
            removed_select: removed.0,
            removed_mutate: removed.1,
            objective: current.objective(),
            best_objective: self.best.objective(),
        });
    }

    fn finish(self) -> SolveResult {
        SolveResult {
            best: self.best,
            initial_objective: self.initial_objective,
            trace: self.trace,
            iterations_run: self.iteration,
        }
    }
}

fn solve_greedy(problem: &Problem, params: &Params) -> Result<SolveResult, SolveError> {
    params.validate()?;
    let eval = problem.evaluator(params)?;
    let mut rng = SolverRng::new(params.seed);
    let initial = initial_greedy(&eval, params, &mut rng)?;
    Ok(Progress::start(initial).finish())
}

/// Improved squeaky wheel: analysis, selection, mutation, prioritisation
/// and construction on a single evolving schedule, keeping the best seen.
pub fn solve_iswo(problem: &Problem, params: &Params) -> Result<SolveResult, SolveError> {
    params.validate()?;
    let eval = problem.evaluator(params)?;
    let mut rng = SolverRng::new(params.seed);
    let mut current = initial_greedy(&eval, params, &mut rng)?;
    let mut progress = Progress::start(current.clone());

    while progress.running(params) {
        progress.iteration += 1;
        let fitness = analyze(&current, &eval);
        let selection = select(&current, &fitness, params.p, &eval, &mut rng);
        let (partial, mutated) = mutate(selection.retained, params.p_m, &eval, &mut rng);
        let mut removed = selection.removed;
        let removed_counts = (removed.len(), mutated.len());
        removed.extend(mutated);
        let sequence = prioritize(&removed, &fitness, &partial, &eval);
        let mut next = construct(partial, &sequence, params.k, &eval, &mut rng)?;
        if params.redundancy_pass {
            next = remove_redundant(next, &eval);
        }
        debug_assert!(next.is_complete() && next.is_consistent(&problem.pool));
        current = next;
        progress.record(&current, Some(selection.p_s), removed_counts);
    }
    Ok(progress.finish())
}

/// Classic squeaky wheel baseline: rebuild from scratch each iteration in
/// piece-priority order, then raise each piece's priority by how badly its
/// covering shift scored.
pub fn solve_swo(problem: &Problem, params: &Params) -> Result<SolveResult, SolveError> {
    params.validate()?;
    let eval = problem.evaluator(params)?;
    let mut rng = SolverRng::new(params.seed);
    let initial = initial_greedy(&eval, params, &mut rng)?;
    let mut progress = Progress::start(initial);

    let n = problem.pool.n_pieces();
    let mut priority: Vec<f64> = (0..n).map(|p| (n - 1 - p) as f64).collect();
    let mut sequence: Vec<usize> = (0..n).collect();
    while progress.running(params) {
        progress.iteration += 1;
        sequence.sort_by(|a, b| priority[*b].total_cmp(&priority[*a]).then(a.cmp(b)));
        let empty = Schedule::empty(n, params.fixed_charge);
        let mut schedule = construct(empty, &sequence, params.k, &eval, &mut rng)?;
        if params.redundancy_pass {
            schedule = remove_redundant(schedule, &eval);
        }
        debug_assert!(schedule.is_complete() && schedule.is_consistent(&problem.pool));

        let fitness = analyze(&schedule, &eval);
        let mut worst = vec![f64::INFINITY; n];
        for (&id, &f) in &fitness {
            for &p in &problem.pool.shifts[id].pieces {
                worst[p] = worst[p].min(f);
            }
        }
        for (prio, f) in priority.iter_mut().zip(&worst) {
            *prio += 1.0 - f;
        }
        progress.record(&schedule, None, (0, 0));
    }
    Ok(progress.finish())
}
