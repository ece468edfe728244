//! The single random stream of a solve.
//!
//! The generator is PCG XSL RR 128/64 (`Pcg64`), seeded with
//! `SeedableRng::seed_from_u64`. Derived draws use fixed formulas so a run
//! is reproducible from the seed alone:
//!
//! * `unit()`: `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`;
//! * `below(n)`: `(next_u64 * n) >> 64` in 128-bit arithmetic.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

#[derive(Debug, Clone)]
pub struct SolverRng {
    inner: Pcg64,
}

impl SolverRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Pcg64::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index in `0..n`. `n` must be positive.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}
