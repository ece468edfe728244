//! Domain model: vehicle blocks, relief opportunities, pieces of work,
//! spells and shifts.
//!
//! All times are integer minutes from midnight. Instances are read from a
//! raw [`InstanceData`] document and validated into an [`Instance`], which
//! carries the derived pieces of work. Everything here is immutable once
//! built and can be shared freely between solver runs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point on a block where a driver may hand the vehicle over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliefOpportunity {
    pub time_min: u32,
    pub location: String,
}

/// The work of one vehicle for the day, split by its relief opportunities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub relief_opportunities: Vec<ReliefOpportunity>,
}

impl Block {
    pub fn n_pieces(&self) -> usize {
        self.relief_opportunities.len().saturating_sub(1)
    }
}

/// Driver work rules.
///
/// `min_ratio` and `max_ratio` bound the work-time / spreadover ratio and are
/// expressed in whole percent so the instance file stays integer-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rules {
    pub min_work_time: u32,
    pub max_work_time: u32,
    pub min_ratio: u32,
    pub max_ratio: u32,
    pub max_spells: u32,
    pub max_spreadover: u32,
    pub min_break_between_spells: u32,
    pub signon_allowance: u32,
    pub signoff_allowance: u32,
}

impl Default for Rules {
    fn default() -> Self {
        Self {
            min_work_time: 330,
            max_work_time: 450,
            min_ratio: 78,
            max_ratio: 100,
            max_spells: 4,
            max_spreadover: 540,
            min_break_between_spells: 30,
            signon_allowance: 0,
            signoff_allowance: 0,
        }
    }
}

/// Upper bound on spells per shift; the spell-count membership is only
/// defined up to four.
pub const MAX_SPELLS_LIMIT: u32 = 4;

/// Indivisible work between two consecutive relief opportunities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PieceOfWork {
    /// Index of the owning block in [`Instance::blocks`].
    pub block: usize,
    pub index_in_block: usize,
    pub start_min: u32,
    pub end_min: u32,
    pub piece_id: usize,
}

impl PieceOfWork {
    #[inline]
    pub fn work_time(&self) -> u32 {
        self.end_min - self.start_min
    }
}

/// Consecutive pieces `first_piece..=last_piece` on one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spell {
    pub block: usize,
    pub first_piece: usize,
    pub last_piece: usize,
}

impl Spell {
    pub fn new(block: usize, first_piece: usize, last_piece: usize) -> Self {
        debug_assert!(first_piece <= last_piece);
        Self {
            block,
            first_piece,
            last_piece,
        }
    }

    pub fn len(&self) -> usize {
        self.last_piece - self.first_piece + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One driver's day of work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shift {
    pub spells: Vec<Spell>,
    /// Global piece ids, sorted ascending.
    pub pieces: Vec<usize>,
    pub work_time: u32,
    pub spreadover: u32,
    /// Paid time; equal to the spreadover.
    pub cost: u32,
}

impl Shift {
    /// Builds a shift from chronologically ordered spells. Does not check
    /// legality; see [`Instance::shift_violations`].
    pub fn from_spells(instance: &Instance, spells: Vec<Spell>) -> Self {
        assert!(!spells.is_empty(), "a shift needs at least one spell");
        let mut pieces = Vec::new();
        let mut work_time = 0;
        for spell in &spells {
            for idx in spell.first_piece..=spell.last_piece {
                let pid = instance.piece_id(spell.block, idx);
                work_time += instance.pieces[pid].work_time();
                pieces.push(pid);
            }
        }
        pieces.sort_unstable();
        let first = spells.first().unwrap();
        let last = spells.last().unwrap();
        let sign_on = instance
            .spell_start(first)
            .saturating_sub(instance.rules.signon_allowance);
        let sign_off = instance.spell_end(last) + instance.rules.signoff_allowance;
        let spreadover = sign_off - sign_on;
        Self {
            spells,
            pieces,
            work_time,
            spreadover,
            cost: spreadover,
        }
    }

    /// Work time over spreadover, in (0, 1].
    #[inline]
    pub fn ratio(&self) -> f64 {
        f64::from(self.work_time) / f64::from(self.spreadover)
    }

    #[inline]
    pub fn n_pieces(&self) -> usize {
        self.pieces.len()
    }

    #[inline]
    pub fn n_spells(&self) -> usize {
        self.spells.len()
    }

    pub fn covers(&self, piece: usize) -> bool {
        self.pieces.binary_search(&piece).is_ok()
    }
}

/// Raw, unvalidated instance document as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceData {
    pub name: String,
    pub rules: Rules,
    pub blocks: Vec<Block>,
}

impl InstanceData {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    EmptyInstance,
    NoPieces { block: String },
    NonIncreasingTimes { block: String, position: usize },
    DuplicateBlockId { block: String },
    WorkTimeBounds { min: u32, max: u32 },
    RatioBounds { min: u32, max: u32 },
    SpellLimit { max_spells: u32 },
    ZeroSpreadover,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyInstance => write!(f, "instance has no pieces of work"),
            Self::NoPieces { block } => write!(f, "block {block} has no pieces"),
            Self::NonIncreasingTimes { block, position } => write!(
                f,
                "block {block}: relief opportunity times not strictly increasing at position {position}"
            ),
            Self::DuplicateBlockId { block } => write!(f, "duplicate block id {block}"),
            Self::WorkTimeBounds { min, max } => {
                write!(f, "min_work_time {min} must be below max_work_time {max}")
            }
            Self::RatioBounds { min, max } => write!(
                f,
                "min_ratio {min} must be below max_ratio {max} (percent, at most 100)"
            ),
            Self::SpellLimit { max_spells } => write!(
                f,
                "max_spells {max_spells} must lie in 1..={MAX_SPELLS_LIMIT}"
            ),
            Self::ZeroSpreadover => write!(f, "max_spreadover must be positive"),
        }
    }
}

/// All problems found in an instance document. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("block {block}: relief opportunity times must strictly increase")]
    NonIncreasingTimes { block: String },
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("cannot parse instance: {0}")]
    Parse(String),
}

/// Splits every block into its pieces of work. Piece ids are dense and
/// ordered block by block, then by position in the block.
pub fn derive_pieces(data: &InstanceData) -> Result<Vec<PieceOfWork>, ModelError> {
    let mut pieces = Vec::new();
    for (b, block) in data.blocks.iter().enumerate() {
        for (i, pair) in block.relief_opportunities.windows(2).enumerate() {
            let (start, end) = (pair[0].time_min, pair[1].time_min);
            if end <= start {
                return Err(ModelError::NonIncreasingTimes {
                    block: block.id.clone(),
                });
            }
            pieces.push(PieceOfWork {
                block: b,
                index_in_block: i,
                start_min: start,
                end_min: end,
                piece_id: pieces.len(),
            });
        }
    }
    Ok(pieces)
}

/// Collects every rule and structure violation in an instance document.
pub fn validate_instance(data: &InstanceData) -> ValidationReport {
    let mut issues = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut total_pieces = 0;
    for block in &data.blocks {
        if !seen.insert(block.id.as_str()) {
            issues.push(ValidationIssue::DuplicateBlockId {
                block: block.id.clone(),
            });
        }
        if block.relief_opportunities.len() < 2 {
            issues.push(ValidationIssue::NoPieces {
                block: block.id.clone(),
            });
            continue;
        }
        total_pieces += block.n_pieces();
        if let Some(pos) = block
            .relief_opportunities
            .windows(2)
            .position(|w| w[1].time_min <= w[0].time_min)
        {
            issues.push(ValidationIssue::NonIncreasingTimes {
                block: block.id.clone(),
                position: pos + 1,
            });
        }
    }
    if total_pieces == 0 {
        issues.push(ValidationIssue::EmptyInstance);
    }
    let r = &data.rules;
    if r.min_work_time >= r.max_work_time {
        issues.push(ValidationIssue::WorkTimeBounds {
            min: r.min_work_time,
            max: r.max_work_time,
        });
    }
    if r.min_ratio >= r.max_ratio || r.max_ratio > 100 {
        issues.push(ValidationIssue::RatioBounds {
            min: r.min_ratio,
            max: r.max_ratio,
        });
    }
    if r.max_spells == 0 || r.max_spells > MAX_SPELLS_LIMIT {
        issues.push(ValidationIssue::SpellLimit {
            max_spells: r.max_spells,
        });
    }
    if r.max_spreadover == 0 {
        issues.push(ValidationIssue::ZeroSpreadover);
    }
    ValidationReport { issues }
}

/// Reasons a candidate shift breaks the rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftViolation {
    SpellCount,
    SpellOrder,
    AdjacentSpells,
    ShortBreak,
    WorkTime,
    Ratio,
    Spreadover,
}

/// A validated instance with its derived pieces.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub blocks: Vec<Block>,
    pub rules: Rules,
    pub pieces: Vec<PieceOfWork>,
    /// Piece id of the first piece of each block.
    block_offsets: Vec<usize>,
}

impl Instance {
    pub fn new(data: InstanceData) -> Result<Self, ModelError> {
        let report = validate_instance(&data);
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        let pieces = derive_pieces(&data)?;
        let mut block_offsets = Vec::with_capacity(data.blocks.len());
        let mut offset = 0;
        for block in &data.blocks {
            block_offsets.push(offset);
            offset += block.n_pieces();
        }
        Ok(Self {
            name: data.name,
            blocks: data.blocks,
            rules: data.rules,
            pieces,
            block_offsets,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Self::new(InstanceData::from_json(text)?)
    }

    pub fn to_data(&self) -> InstanceData {
        InstanceData {
            name: self.name.clone(),
            rules: self.rules,
            blocks: self.blocks.clone(),
        }
    }

    #[inline]
    pub fn n_pieces(&self) -> usize {
        self.pieces.len()
    }

    #[inline]
    pub fn piece_id(&self, block: usize, index_in_block: usize) -> usize {
        debug_assert!(index_in_block < self.blocks[block].n_pieces());
        self.block_offsets[block] + index_in_block
    }

    pub fn block_index(&self, id: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.id == id)
    }

    #[inline]
    pub fn spell_start(&self, spell: &Spell) -> u32 {
        self.pieces[self.piece_id(spell.block, spell.first_piece)].start_min
    }

    #[inline]
    pub fn spell_end(&self, spell: &Spell) -> u32 {
        self.pieces[self.piece_id(spell.block, spell.last_piece)].end_min
    }

    pub fn spell_work(&self, spell: &Spell) -> u32 {
        self.spell_end(spell) - self.spell_start(spell)
    }

    /// Total vehicle work over all blocks.
    pub fn total_work(&self) -> u64 {
        self.blocks
            .iter()
            .filter(|b| b.relief_opportunities.len() >= 2)
            .map(|b| {
                let ros = &b.relief_opportunities;
                u64::from(ros[ros.len() - 1].time_min - ros[0].time_min)
            })
            .sum()
    }

    /// Whether `next` may follow `prev` within one shift.
    pub fn can_chain(&self, prev: &Spell, next: &Spell) -> bool {
        if prev.block == next.block && next.first_piece <= prev.last_piece + 1 {
            return false;
        }
        self.spell_start(next) >= self.spell_end(prev) + self.rules.min_break_between_spells
    }

    /// Lists every rule the shift breaks; empty means legal.
    pub fn shift_violations(&self, shift: &Shift) -> Vec<ShiftViolation> {
        let r = &self.rules;
        let mut out = Vec::new();
        if shift.spells.is_empty() || shift.spells.len() > r.max_spells as usize {
            out.push(ShiftViolation::SpellCount);
        }
        for pair in shift.spells.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            if self.spell_start(next) < self.spell_end(prev) {
                out.push(ShiftViolation::SpellOrder);
            } else if prev.block == next.block && next.first_piece == prev.last_piece + 1 {
                out.push(ShiftViolation::AdjacentSpells);
            } else if self.spell_start(next) < self.spell_end(prev) + r.min_break_between_spells {
                out.push(ShiftViolation::ShortBreak);
            }
        }
        if shift.work_time < r.min_work_time || shift.work_time > r.max_work_time {
            out.push(ShiftViolation::WorkTime);
        }
        let pct_work = u64::from(shift.work_time) * 100;
        let spread = u64::from(shift.spreadover);
        if pct_work < u64::from(r.min_ratio) * spread || pct_work > u64::from(r.max_ratio) * spread
        {
            out.push(ShiftViolation::Ratio);
        }
        if shift.spreadover > r.max_spreadover {
            out.push(ShiftViolation::Spreadover);
        }
        out
    }

    pub fn is_legal(&self, shift: &Shift) -> bool {
        self.shift_violations(shift).is_empty()
    }
}
