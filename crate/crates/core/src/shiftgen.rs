//! Enumeration of the candidate shift pool.
//!
//! Every legal shift is generated up front: spells are all contiguous piece
//! ranges that fit within the work-time limit, and shifts are chronological
//! chains of up to `max_spells` spells found by depth-first search. The
//! resulting [`CandidatePool`] also carries the per-piece coverage lists used
//! by the constructor and the criterion bounds used by the fuzzy evaluation.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Instance, Shift, Spell};

pub const DEFAULT_POOL_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShiftGenError {
    #[error("uncoverable piece(s): {pieces:?}")]
    UncoverablePieces { pieces: Vec<usize> },
    #[error("pool size limit exceeded: more than {cap} shifts")]
    PoolLimitExceeded { cap: usize },
    #[error("pool dump line {line}: {reason}")]
    BadDump { line: usize, reason: String },
}

/// Spread of each structural criterion over the pool: `a` is the maximum
/// and `b` the minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionBounds {
    pub work_time: (f64, f64),
    pub ratio: (f64, f64),
    pub n_pieces: (f64, f64),
}

impl CriterionBounds {
    pub fn over<'a>(shifts: impl IntoIterator<Item = &'a Shift>) -> Self {
        let mut work = (f64::NEG_INFINITY, f64::INFINITY);
        let mut ratio = work;
        let mut pieces = work;
        let widen = |acc: &mut (f64, f64), x: f64| {
            acc.0 = acc.0.max(x);
            acc.1 = acc.1.min(x);
        };
        let mut any = false;
        for s in shifts {
            any = true;
            widen(&mut work, f64::from(s.work_time));
            widen(&mut ratio, s.ratio());
            widen(&mut pieces, s.n_pieces() as f64);
        }
        if !any {
            return Self {
                work_time: (0.0, 0.0),
                ratio: (0.0, 0.0),
                n_pieces: (0.0, 0.0),
            };
        }
        Self {
            work_time: work,
            ratio,
            n_pieces: pieces,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CandidatePool {
    pub shifts: Vec<Shift>,
    /// For each piece id, the ids of the shifts covering it, ascending.
    pub coverage: Vec<Vec<usize>>,
    pub bounds: CriterionBounds,
}

impl CandidatePool {
    /// Indexes an explicit list of shifts. Fails if some piece has no cover.
    pub fn from_shifts(instance: &Instance, shifts: Vec<Shift>) -> Result<Self, ShiftGenError> {
        let mut coverage = vec![Vec::new(); instance.n_pieces()];
        for (id, shift) in shifts.iter().enumerate() {
            for &p in &shift.pieces {
                coverage[p].push(id);
            }
        }
        let uncovered: Vec<usize> = coverage
            .iter()
            .enumerate()
            .filter(|(_, list)| list.is_empty())
            .map(|(p, _)| p)
            .collect();
        if !uncovered.is_empty() {
            return Err(ShiftGenError::UncoverablePieces { pieces: uncovered });
        }
        let bounds = CriterionBounds::over(&shifts);
        Ok(Self {
            shifts,
            coverage,
            bounds,
        })
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn n_pieces(&self) -> usize {
        self.coverage.len()
    }

    /// One shift per line: `id cost block:first-last ...`.
    pub fn dump(&self, instance: &Instance) -> String {
        let mut out = String::new();
        for (id, shift) in self.shifts.iter().enumerate() {
            write!(out, "{id} {}", shift.cost).unwrap();
            for spell in &shift.spells {
                write!(
                    out,
                    " {}:{}-{}",
                    instance.blocks[spell.block].id, spell.first_piece, spell.last_piece
                )
                .unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Reads a pool back from [`CandidatePool::dump`] output.
    pub fn parse_dump(instance: &Instance, text: &str) -> Result<Self, ShiftGenError> {
        let mut shifts = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let bad = |reason: &str| ShiftGenError::BadDump {
                line: n + 1,
                reason: reason.to_string(),
            };
            let mut fields = line.split_whitespace();
            let id: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("missing shift id"))?;
            if id != shifts.len() {
                return Err(bad("shift ids must be dense and ordered"));
            }
            let cost: u32 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("missing cost"))?;
            let mut spells = Vec::new();
            for field in fields {
                spells.push(parse_spell(instance, field).ok_or_else(|| bad(field))?);
            }
            if spells.is_empty() {
                return Err(bad("shift without spells"));
            }
            let shift = Shift::from_spells(instance, spells);
            if shift.cost != cost {
                return Err(bad("cost does not match spells"));
            }
            shifts.push(shift);
        }
        Self::from_shifts(instance, shifts)
    }
}

pub(crate) fn parse_spell(instance: &Instance, field: &str) -> Option<Spell> {
    let (block_id, range) = field.rsplit_once(':')?;
    let (first, last) = range.split_once('-')?;
    let block = instance.block_index(block_id)?;
    let first: usize = first.parse().ok()?;
    let last: usize = last.parse().ok()?;
    (first <= last && last < instance.blocks[block].n_pieces())
        .then(|| Spell::new(block, first, last))
}

/// All contiguous piece ranges on a block whose duration fits within the
/// maximum work time, ordered by first piece then last piece.
pub fn enumerate_spells(instance: &Instance, block: usize) -> Vec<Spell> {
    let n = instance.blocks[block].n_pieces();
    let max_work = instance.rules.max_work_time;
    let mut spells = Vec::new();
    for first in 0..n {
        for last in first..n {
            let spell = Spell::new(block, first, last);
            if instance.spell_work(&spell) > max_work {
                break;
            }
            spells.push(spell);
        }
    }
    spells
}

#[derive(Debug, Clone, Copy)]
pub struct ShiftGenOptions {
    pub pool_cap: usize,
}

impl Default for ShiftGenOptions {
    fn default() -> Self {
        Self {
            pool_cap: DEFAULT_POOL_CAP,
        }
    }
}

struct SpellInfo {
    spell: Spell,
    start: u32,
    end: u32,
    work: u32,
}

/// Generates every legal shift of the instance.
pub fn enumerate_shifts(
    instance: &Instance,
    options: ShiftGenOptions,
) -> Result<CandidatePool, ShiftGenError> {
    let mut spells: Vec<SpellInfo> = (0..instance.blocks.len())
        .flat_map(|b| enumerate_spells(instance, b))
        .map(|spell| SpellInfo {
            spell,
            start: instance.spell_start(&spell),
            end: instance.spell_end(&spell),
            work: instance.spell_work(&spell),
        })
        .collect();
    spells.sort_by_key(|s| (s.start, s.spell));

    let mut search = Search {
        instance,
        spells: &spells,
        cap: options.pool_cap,
        chain: Vec::with_capacity(instance.rules.max_spells as usize),
        out: Vec::new(),
    };
    for (first, info) in spells.iter().enumerate() {
        search.chain.push(first);
        search.extend(info.work)?;
        search.chain.pop();
    }
    CandidatePool::from_shifts(instance, search.out)
}

struct Search<'a> {
    instance: &'a Instance,
    spells: &'a [SpellInfo],
    cap: usize,
    chain: Vec<usize>,
    out: Vec<Shift>,
}

impl Search<'_> {
    fn extend(&mut self, work: u32) -> Result<(), ShiftGenError> {
        let rules = &self.instance.rules;
        let first = &self.spells[self.chain[0]];
        let last = &self.spells[*self.chain.last().unwrap()];
        let sign_on = first.start.saturating_sub(rules.signon_allowance);

        if last.end + rules.signoff_allowance - sign_on <= rules.max_spreadover {
            let shift = Shift::from_spells(
                self.instance,
                self.chain.iter().map(|&i| self.spells[i].spell).collect(),
            );
            if self.instance.is_legal(&shift) {
                if self.out.len() == self.cap {
                    return Err(ShiftGenError::PoolLimitExceeded { cap: self.cap });
                }
                self.out.push(shift);
            }
        }
        if self.chain.len() >= rules.max_spells as usize {
            return Ok(());
        }

        let earliest = last.end + rules.min_break_between_spells;
        let from = self.spells.partition_point(|s| s.start < earliest);
        for next in from..self.spells.len() {
            let cand = &self.spells[next];
            if cand.start + rules.signoff_allowance > sign_on + rules.max_spreadover {
                break;
            }
            if cand.end + rules.signoff_allowance - sign_on > rules.max_spreadover
                || work + cand.work > rules.max_work_time
                || !self.instance.can_chain(&last.spell, &cand.spell)
            {
                continue;
            }
            self.chain.push(next);
            let res = self.extend(work + cand.work);
            self.chain.pop();
            res?;
        }
        Ok(())
    }
}
