//! Shift fitness.
//!
//! A shift's fitness is the product of a structural coefficient and an
//! over-cover penalty, both in [0, 1]. The structural coefficient is a
//! weighted sum of five fuzzy memberships: work time, work/spreadover ratio
//! and piece count (quadratic S-curves over the pool's range), spell count
//! (a fixed table) and the shift's LP-relaxation value (a Gaussian around
//! the largest value in the fractional cover). The over-cover penalty is the
//! share of the shift's work time that no other shift in the schedule
//! covers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::FractionalCover;
use crate::model::{Instance, Shift};
use crate::shiftgen::{CandidatePool, CriterionBounds};

/// Absolute tolerance for real-valued equality checks.
pub const EPS: f64 = 1e-12;

/// Default fixed charge per shift, which makes the shift count dominate
/// the total cost.
pub const DEFAULT_FIXED_CHARGE: u32 = 2000;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("weights must be finite and non-negative, got {0:?}")]
    NegativeWeight([f64; 5]),
    #[error("weights must sum to 1, got sum {sum}")]
    WeightSum { sum: f64 },
    #[error("spell count {0} outside 1..=4")]
    SpellCount(usize),
    #[error("cannot drop the fractional criterion: the remaining weights sum to zero")]
    NoStructuralWeight,
}

/// Criterion weights `w1..w5`: non-negative and summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights([f64; 5]);

impl Weights {
    pub const STANDARD: [f64; 5] = [0.20, 0.10, 0.10, 0.20, 0.40];

    pub fn new(w: [f64; 5]) -> Result<Self, EvalError> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(EvalError::NegativeWeight(w));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > EPS {
            return Err(EvalError::WeightSum { sum });
        }
        Ok(Self(w))
    }

    pub fn get(&self) -> [f64; 5] {
        self.0
    }

    /// Sets `w5` to zero and rescales the rest to sum to one; used when the
    /// LP relaxation is switched off.
    pub fn without_fractional(&self) -> Result<Self, EvalError> {
        let [w1, w2, w3, w4, w5] = self.0;
        if w5 == 0.0 {
            return Ok(*self);
        }
        let rest = w1 + w2 + w3 + w4;
        if rest <= 0.0 {
            return Err(EvalError::NoStructuralWeight);
        }
        Ok(Self([w1 / rest, w2 / rest, w3 / rest, w4 / rest, 0.0]))
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self(Self::STANDARD)
    }
}

impl Serialize for Weights {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.get().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = <[f64; 5]>::deserialize(d)?;
        Weights::new(w).map_err(serde::de::Error::custom)
    }
}

/// Quadratic S-curve rising from 0 at `b` (the minimum) to 1 at `a` (the
/// maximum), passing 0.5 at the midpoint. `x` is clamped into `[b, a]`;
/// a degenerate range `a == b` gives 1.
pub fn membership_s_curve(x: f64, a: f64, b: f64) -> f64 {
    let span = a - b;
    if span.abs() <= EPS {
        return 1.0;
    }
    let x = x.clamp(b.min(a), a.max(b));
    let mid = (a + b) / 2.0;
    if x < mid {
        let t = (x - b) / span;
        2.0 * t * t
    } else {
        let t = (x - a) / span;
        1.0 - 2.0 * t * t
    }
}

/// Two-spell shifts are best, three-spell shifts next, one or four worst.
pub fn membership_spells(n_spells: usize) -> Result<f64, EvalError> {
    match n_spells {
        2 => Ok(1.0),
        3 => Ok(0.5),
        1 | 4 => Ok(0.0),
        n => Err(EvalError::SpellCount(n)),
    }
}

/// Gaussian membership on the LP value: 1 at the cover's maximum `a`,
/// 0.01 at its minimum `b`, 0 outside the cover.
pub fn membership_fractional(x5: f64, a: f64, b: f64, in_cover: bool) -> f64 {
    if !in_cover {
        return 0.0;
    }
    let span = a - b;
    if span.abs() <= EPS {
        return 1.0;
    }
    let d = x5 - a;
    (0.01f64.ln() / (span * span) * d * d).exp()
}

/// The five criterion memberships of one pool shift.
pub fn memberships(
    shift: &Shift,
    shift_id: usize,
    bounds: &CriterionBounds,
    frac: &FractionalCover,
) -> [f64; 5] {
    let (a1, b1) = bounds.work_time;
    let (a2, b2) = bounds.ratio;
    let (a3, b3) = bounds.n_pieces;
    [
        membership_s_curve(f64::from(shift.work_time), a1, b1),
        membership_s_curve(shift.ratio(), a2, b2),
        membership_s_curve(shift.n_pieces() as f64, a3, b3),
        // Spell counts are checked against `max_spells <= 4` when the
        // instance is validated.
        membership_spells(shift.n_spells()).unwrap_or(0.0),
        membership_fractional(
            frac.values[shift_id],
            frac.a,
            frac.b,
            frac.in_cover[shift_id],
        ),
    ]
}

/// Weighted sum of memberships. Normalised by the weight total so unit
/// memberships give exactly 1 despite rounding in the weights.
pub fn aggregate(weights: &Weights, mu: &[f64; 5]) -> f64 {
    let w = weights.get();
    let total: f64 = w.iter().sum();
    let num: f64 = w.iter().zip(mu).map(|(w, m)| w * m).sum();
    (num / total).clamp(0.0, 1.0)
}

pub fn structural_coefficient(
    shift: &Shift,
    shift_id: usize,
    bounds: &CriterionBounds,
    weights: &Weights,
    frac: &FractionalCover,
) -> f64 {
    aggregate(weights, &memberships(shift, shift_id, bounds, frac))
}

/// Number of schedule shifts covering each piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageContext {
    counts: Vec<u32>,
}

impl CoverageContext {
    pub fn new(n_pieces: usize) -> Self {
        Self {
            counts: vec![0; n_pieces],
        }
    }

    pub fn from_shifts<'a>(n_pieces: usize, shifts: impl IntoIterator<Item = &'a Shift>) -> Self {
        let mut ctx = Self::new(n_pieces);
        for s in shifts {
            ctx.add(s);
        }
        ctx
    }

    pub fn add(&mut self, shift: &Shift) {
        for &p in &shift.pieces {
            self.counts[p] += 1;
        }
    }

    pub fn remove(&mut self, shift: &Shift) {
        for &p in &shift.pieces {
            debug_assert!(self.counts[p] > 0);
            self.counts[p] -= 1;
        }
    }

    #[inline]
    pub fn count(&self, piece: usize) -> u32 {
        self.counts[piece]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn is_covered(&self, piece: usize) -> bool {
        self.counts[piece] > 0
    }

    pub fn is_complete(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }

    pub fn uncovered(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(p, _)| p)
    }
}

/// Whether the shift being scored is already counted in the context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Presence {
    /// Part of the schedule; its own cover is subtracted.
    Member,
    /// A candidate for insertion.
    Candidate,
}

/// Share of the shift's work time not covered by any other shift.
/// Pieces nobody else covers count fully.
pub fn over_cover_penalty(
    instance: &Instance,
    shift: &Shift,
    ctx: &CoverageContext,
    presence: Presence,
) -> f64 {
    let own = match presence {
        Presence::Member => 1,
        Presence::Candidate => 0,
    };
    let mut unique = 0u64;
    let mut total = 0u64;
    for &p in &shift.pieces {
        let beta = u64::from(instance.pieces[p].work_time());
        total += beta;
        if ctx.count(p) <= own {
            unique += beta;
        }
    }
    if total == 0 {
        return 0.0;
    }
    unique as f64 / total as f64
}

#[inline]
pub fn combine(structural: f64, penalty: f64) -> f64 {
    structural * penalty
}

/// Total cost plus a fixed charge per shift.
pub fn objective<'a>(shifts: impl IntoIterator<Item = &'a Shift>, fixed_charge: u32) -> u64 {
    shifts
        .into_iter()
        .map(|s| u64::from(s.cost) + u64::from(fixed_charge))
        .sum()
}

/// Fitness oracle for one pool: structural coefficients are fixed per solve,
/// so they are computed once and only the penalty is evaluated on demand.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    pub instance: &'a Instance,
    pub pool: &'a CandidatePool,
    structural: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        instance: &'a Instance,
        pool: &'a CandidatePool,
        weights: &Weights,
        frac: &FractionalCover,
    ) -> Self {
        let structural = pool
            .shifts
            .iter()
            .enumerate()
            .map(|(id, s)| structural_coefficient(s, id, &pool.bounds, weights, frac))
            .collect();
        Self {
            instance,
            pool,
            structural,
        }
    }

    #[inline]
    pub fn structural(&self, shift_id: usize) -> f64 {
        self.structural[shift_id]
    }

    #[inline]
    pub fn penalty(&self, shift_id: usize, ctx: &CoverageContext, presence: Presence) -> f64 {
        over_cover_penalty(self.instance, &self.pool.shifts[shift_id], ctx, presence)
    }

    #[inline]
    pub fn fitness(&self, shift_id: usize, ctx: &CoverageContext, presence: Presence) -> f64 {
        combine(
            self.structural(shift_id),
            self.penalty(shift_id, ctx, presence),
        )
    }
}
