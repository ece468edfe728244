//! Solution, trace and oracle fixture files.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{IterationTrace, Params, Problem, SolveResult};
use crate::model::{Instance, Shift, Spell};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("solution does not match instance: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpellRecord {
    pub block: String,
    pub first_piece: usize,
    pub last_piece: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub spells: Vec<SpellRecord>,
    pub cost: u32,
}

/// A solved schedule as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance: String,
    pub params: Params,
    pub shifts: Vec<ShiftRecord>,
    pub objective: u64,
    pub n_shifts: usize,
    pub iterations_run: u64,
    pub seed: u64,
}

impl SolutionFile {
    /// Shifts are listed in ascending pool id order.
    pub fn new(problem: &Problem, params: &Params, result: &SolveResult) -> Self {
        let shifts = result
            .best
            .sorted_ids()
            .into_iter()
            .map(|id| shift_record(&problem.instance, &problem.pool.shifts[id]))
            .collect::<Vec<_>>();
        Self {
            instance: problem.instance.name.clone(),
            params: params.clone(),
            n_shifts: shifts.len(),
            shifts,
            objective: result.best.objective(),
            iterations_run: result.iterations_run,
            seed: params.seed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds every shift from its spells and recomputes the objective
    /// from scratch. Fails if a shift is illegal, a stored cost disagrees,
    /// or some piece is left uncovered.
    pub fn recompute_objective(&self, instance: &Instance) -> Result<u64, IoError> {
        let mismatch = |m: String| Err(IoError::Mismatch(m));
        let mut covered = vec![false; instance.n_pieces()];
        let mut total = 0u64;
        for (n, record) in self.shifts.iter().enumerate() {
            let mut spells = Vec::with_capacity(record.spells.len());
            for sp in &record.spells {
                let Some(block) = instance.block_index(&sp.block) else {
                    return mismatch(format!("shift {n}: unknown block {}", sp.block));
                };
                if sp.first_piece > sp.last_piece
                    || sp.last_piece >= instance.blocks[block].n_pieces()
                {
                    return mismatch(format!("shift {n}: bad piece range on {}", sp.block));
                }
                spells.push(Spell::new(block, sp.first_piece, sp.last_piece));
            }
            if spells.is_empty() {
                return mismatch(format!("shift {n} has no spells"));
            }
            let shift = Shift::from_spells(instance, spells);
            if !instance.is_legal(&shift) {
                return mismatch(format!("shift {n} breaks the rules"));
            }
            if shift.cost != record.cost {
                return mismatch(format!(
                    "shift {n}: stored cost {} but spells give {}",
                    record.cost, shift.cost
                ));
            }
            for &p in &shift.pieces {
                covered[p] = true;
            }
            total += u64::from(shift.cost) + u64::from(self.params.fixed_charge);
        }
        if let Some(p) = covered.iter().position(|c| !c) {
            return mismatch(format!("piece {p} is not covered"));
        }
        Ok(total)
    }

    pub fn total_cost(&self) -> u64 {
        self.shifts.iter().map(|s| u64::from(s.cost)).sum()
    }
}

fn shift_record(instance: &Instance, shift: &Shift) -> ShiftRecord {
    ShiftRecord {
        spells: shift
            .spells
            .iter()
            .map(|sp| SpellRecord {
                block: instance.blocks[sp.block].id.clone(),
                first_piece: sp.first_piece,
                last_piece: sp.last_piece,
            })
            .collect(),
        cost: shift.cost,
    }
}

/// Trace as CSV with header
/// `iteration,p_s,removed_select,removed_mutate,objective,best_objective`.
/// An empty `p_s` field means no selection draw was made.
pub fn write_trace(trace: &[IterationTrace]) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in trace {
        w.serialize(row)?;
    }
    if trace.is_empty() {
        w.write_record([
            "iteration",
            "p_s",
            "removed_select",
            "removed_mutate",
            "objective",
            "best_objective",
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| IoError::Mismatch(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_trace(text: &str) -> Result<Vec<IterationTrace>, IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(IoError::from))
        .collect()
}

/// One line of the oracle fixture CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub instance: String,
    pub optimal_objective: u64,
    /// Space-separated ascending shift ids.
    pub optimal_shift_ids: String,
}

impl FixtureRow {
    pub fn new(instance: &str, objective: u64, ids: &[usize]) -> Self {
        Self {
            instance: instance.to_string(),
            optimal_objective: objective,
            optimal_shift_ids: ids
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        }
    }

    pub fn shift_ids(&self) -> Vec<usize> {
        self.optimal_shift_ids
            .split_whitespace()
            .filter_map(|s| s.parse().ok())
            .collect()
    }
}

pub fn write_fixtures(rows: &[FixtureRow], with_header: bool) -> Result<String, IoError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(with_header)
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| IoError::Mismatch(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_fixtures(text: &str) -> Result<Vec<FixtureRow>, IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(IoError::from))
        .collect()
}
