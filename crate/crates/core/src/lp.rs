//! LP relaxation of the set-covering model.
//!
//! Solves `min sum_j c_j x_j` subject to `sum_{j covers p} x_j >= 1` for
//! every piece `p` and `0 <= x_j <= 1`, with a dense two-phase tableau
//! simplex. Pricing is by most negative reduced cost with a fallback to
//! Bland's smallest-index rule on degenerate stalls. With non-negative costs the
//! upper bounds never bind at an optimum (any `x_j > 1` can be lowered to 1
//! without losing feasibility), so they are applied by clamping the final
//! solution rather than carried as rows.

use std::fmt::Write as _;

use thiserror::Error;

use crate::shiftgen::CandidatePool;

/// A shift is in the fractional cover when its LP value exceeds this.
pub const IN_COVER_TOL: f64 = 1e-9;
/// Allowed shortfall on a covering constraint after solving.
pub const FEASIBILITY_TOL: f64 = 1e-6;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const RATIO_TIE_TOL: f64 = 1e-12;
/// Consecutive degenerate pivots before pricing falls back to Bland's rule.
const BLAND_AFTER_DEGENERATE: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("LP infeasible: phase one ended with artificial sum {residual}")]
    Infeasible { residual: f64 },
    #[error("LP pivot limit {limit} reached in phase {phase} (objective {objective})")]
    PivotLimit {
        limit: usize,
        phase: u8,
        objective: f64,
    },
    #[error("LP solution violates covering row {row} (coverage {coverage})")]
    Numerical { row: usize, coverage: f64 },
    #[error("cost vector length {costs} does not match {columns} columns")]
    Shape { costs: usize, columns: usize },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LpOptions {
    /// Pivot limit over both phases; `None` scales with the problem size.
    pub max_pivots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// Row-major constraint rows; the last column holds the right-hand side.
    data: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Columns below this index may enter the basis.
    enterable: usize,
    pivots: usize,
    limit: usize,
}

impl Tableau {
    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let p = self.data[r * w + j];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + j];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.data[i * w + j] = 0.0;
        }
        let f = self.cost[j];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[j] = 0.0;
        }
        for i in 0..self.rows {
            let v = &mut self.data[i * w + w - 1];
            if *v < 0.0 && *v > -PIVOT_TOL {
                *v = 0.0;
            }
        }
        self.basis[r] = j;
        self.pivots += 1;
    }

    /// Prices with the most negative reduced cost, switching to Bland's
    /// smallest-index rule while pivots are degenerate so the method cannot
    /// cycle. Both rules break ties by index, so the pivot sequence is a
    /// pure function of the input.
    fn optimize(&mut self, phase: u8) -> Result<(), LpError> {
        let mut stalled = 0usize;
        loop {
            let bland = stalled >= BLAND_AFTER_DEGENERATE;
            let entering = if bland {
                (0..self.enterable).find(|&j| self.cost[j] < -COST_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.enterable {
                    let d = self.cost[j];
                    if d < -COST_TOL && best.is_none_or(|(_, b)| d < b) {
                        best = Some((j, d));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(j) = entering else {
                return Ok(());
            };

            // Ratio test. Near-ties go to the smallest basic index under
            // Bland, otherwise to the largest pivot element.
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.rows {
                let a = self.data[i * self.width + j];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                let take = match leave {
                    None => true,
                    Some((bi, br, ba)) => {
                        if ratio < br - RATIO_TIE_TOL {
                            true
                        } else if ratio <= br + RATIO_TIE_TOL {
                            if bland {
                                self.basis[i] < self.basis[bi]
                            } else {
                                a > ba || (a == ba && self.basis[i] < self.basis[bi])
                            }
                        } else {
                            false
                        }
                    }
                };
                if take {
                    leave = Some((i, ratio, a));
                }
            }
            // Covering LPs with non-negative costs are bounded below.
            let (r, ratio, _) = leave.expect("covering LP cannot be unbounded");
            if self.pivots >= self.limit {
                return Err(LpError::PivotLimit {
                    limit: self.limit,
                    phase,
                    objective: -self.cost[self.width - 1],
                });
            }
            self.pivot(r, j);
            if ratio <= RATIO_TIE_TOL {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
    }
}

/// Solves the covering LP. `rows[i]` lists the columns covering row `i`.
pub fn solve_covering_lp(
    n_columns: usize,
    rows: &[Vec<usize>],
    costs: &[f64],
    options: LpOptions,
) -> Result<LpSolution, LpError> {
    if costs.len() != n_columns {
        return Err(LpError::Shape {
            costs: costs.len(),
            columns: n_columns,
        });
    }
    let m = rows.len();
    let n = n_columns;
    // Columns: structural x, then one surplus per row. Artificials are
    // implicit (indices n + m + i) and never re-enter once they leave.
    let width = n + m + 1;
    let mut data = vec![0.0; m * width];
    for (i, cols) in rows.iter().enumerate() {
        let row = &mut data[i * width..(i + 1) * width];
        for &j in cols {
            row[j] = 1.0;
        }
        row[n + i] = -1.0;
        row[width - 1] = 1.0;
    }
    let mut cost = vec![0.0; width];
    for i in 0..m {
        for (c, v) in cost.iter_mut().zip(&data[i * width..(i + 1) * width]) {
            *c -= v;
        }
    }
    let limit = options.max_pivots.unwrap_or_else(|| 100_000 + 50 * (n + m));
    let mut t = Tableau {
        rows: m,
        width,
        data,
        cost,
        basis: (0..m).map(|i| n + m + i).collect(),
        enterable: n + m,
        pivots: 0,
        limit,
    };

    t.optimize(1)?;
    let residual = -t.cost[width - 1];
    if residual > FEASIBILITY_TOL {
        return Err(LpError::Infeasible { residual });
    }
    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and keep their artificial at zero.
    for i in 0..m {
        if t.basis[i] >= n + m {
            if let Some(j) = (0..n + m).find(|&j| t.row(i)[j].abs() > PIVOT_TOL) {
                t.pivot(i, j);
            }
        }
    }

    let col_cost = |j: usize| if j < n { costs[j] } else { 0.0 };
    let mut cost = vec![0.0; width];
    for (j, c) in cost.iter_mut().enumerate().take(n) {
        *c = costs[j];
    }
    for i in 0..m {
        let cb = col_cost(t.basis[i]);
        if cb != 0.0 {
            for (c, v) in cost.iter_mut().zip(t.row(i)) {
                *c -= cb * v;
            }
        }
    }
    t.cost = cost;
    t.optimize(2)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i).clamp(0.0, 1.0);
        }
    }
    for (i, cols) in rows.iter().enumerate() {
        let coverage: f64 = cols.iter().map(|&j| x[j]).sum();
        if coverage < 1.0 - FEASIBILITY_TOL {
            return Err(LpError::Numerical { row: i, coverage });
        }
    }
    let objective = x.iter().zip(costs).map(|(x, c)| x * c).sum();
    Ok(LpSolution {
        x,
        objective,
        pivots: t.pivots,
    })
}

/// LP values per pool shift, with the cover's value range.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalCover {
    pub values: Vec<f64>,
    pub in_cover: Vec<bool>,
    /// Largest value in the cover.
    pub a: f64,
    /// Smallest value in the cover.
    pub b: f64,
    pub objective: f64,
}

impl FractionalCover {
    /// A cover with nothing in it; every shift scores 0 on the criterion.
    pub fn empty(n_shifts: usize) -> Self {
        Self {
            values: vec![0.0; n_shifts],
            in_cover: vec![false; n_shifts],
            a: 0.0,
            b: 0.0,
            objective: 0.0,
        }
    }

    pub fn from_values(values: Vec<f64>, objective: f64) -> Self {
        let in_cover: Vec<bool> = values.iter().map(|&v| v > IN_COVER_TOL).collect();
        let (mut a, mut b) = (f64::NEG_INFINITY, f64::INFINITY);
        for (v, _) in values.iter().zip(&in_cover).filter(|(_, c)| **c) {
            a = a.max(*v);
            b = b.min(*v);
        }
        if a < b {
            (a, b) = (0.0, 0.0);
        }
        Self {
            values,
            in_cover,
            a,
            b,
            objective,
        }
    }

    pub fn cover_size(&self) -> usize {
        self.in_cover.iter().filter(|&&c| c).count()
    }

    /// One shift per line: `id value in_cover`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, (v, c)) in self.values.iter().zip(&self.in_cover).enumerate() {
            writeln!(out, "{id} {v} {}", u8::from(*c)).unwrap();
        }
        out
    }
}

/// LP relaxation of the pool, costing each shift at its cost plus the fixed
/// charge.
pub fn fractional_cover(
    pool: &CandidatePool,
    fixed_charge: u32,
) -> Result<FractionalCover, LpError> {
    fractional_cover_with(pool, fixed_charge, LpOptions::default())
}

pub fn fractional_cover_with(
    pool: &CandidatePool,
    fixed_charge: u32,
    options: LpOptions,
) -> Result<FractionalCover, LpError> {
    let costs: Vec<f64> = pool
        .shifts
        .iter()
        .map(|s| f64::from(s.cost) + f64::from(fixed_charge))
        .collect();
    let sol = solve_covering_lp(pool.len(), &pool.coverage, &costs, options)?;
    Ok(FractionalCover::from_values(sol.x, sol.objective))
}
