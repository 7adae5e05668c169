//! Semi-implicit finite-difference scheme for one observation interval of the
//! valuation equation at a fixed inflation value.
//!
//! The unknown `ψ[h][j]` lives on ECB levels `r_h = r_lo + hδ`, `h = 1..H−1`,
//! and short-rate nodes `z_j = jΔz`, `j = 0..J`. Time runs backwards,
//! `τ = Θ − t`. Local terms are Crank–Nicolson, the jump sum is explicit, the
//! `z = 0` row uses a one-sided second-order stencil and `z_max` carries a
//! Neumann condition.

mod banded;
mod coefficients;
mod solver;

use std::io::{self, Write};

pub use banded::{BandedMatrix, Factorized};
pub use coefficients::{Coefficients, JumpWeights};
pub use solver::{assemble_system, build_rhs, solve_interval, solve_intervals, step, IntervalSolver};

use crate::error::{PricingError, Result};
use crate::model::{JumpSpec, ModelParams};

/// Default truncation level of the short-rate axis (percent).
pub const DEFAULT_Z_MAX: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// `H`: ECB levels are `r_h`, `h = 1..H−1`.
    pub h_count: usize,
    /// `J`: short-rate intervals.
    pub j_count: usize,
    /// `N`: time steps per observation interval.
    pub n_steps: usize,
    pub z_max: f64,
}

impl Grid {
    /// Grid with `H = ⌊(r_hi − r_lo)/δ⌋`.
    pub fn for_model(params: &ModelParams, n_steps: usize, j_count: usize, z_max: f64) -> Self {
        Self {
            h_count: max_levels(&params.jumps),
            j_count,
            n_steps,
            z_max,
        }
    }

    /// Grid whose levels cover every admissible ECB rate, `H = full_levels`.
    pub fn covering_all_levels(params: &ModelParams, n_steps: usize, j_count: usize, z_max: f64) -> Self {
        Self {
            h_count: full_levels(&params.jumps),
            ..Self::for_model(params, n_steps, j_count, z_max)
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let max_h = full_levels(&params.jumps);
        if self.h_count < 2 || self.h_count > max_h {
            return Err(PricingError::Config(format!(
                "H = {} must lie in [2, {max_h}]",
                self.h_count
            )));
        }
        if self.j_count < 3 {
            return Err(PricingError::Config(format!(
                "J = {} must be at least 3",
                self.j_count
            )));
        }
        if !(self.z_max > 0.0) {
            return Err(PricingError::Config(format!(
                "z_max = {} must be positive",
                self.z_max
            )));
        }
        Ok(())
    }

    /// Number of unknown ECB levels, `H − 1`.
    #[inline]
    pub fn levels(&self) -> usize {
        self.h_count - 1
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        self.z_max / self.j_count as f64
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.dz()
    }

    /// `r_h = r_lo + hδ` for `h = 1..H−1`.
    #[inline]
    pub fn rate(&self, spec: &JumpSpec, h: usize) -> f64 {
        spec.r_lo + h as f64 * spec.delta
    }

    /// The same grid with `N` and `J` doubled.
    pub fn refined(&self) -> Self {
        Self {
            n_steps: 2 * self.n_steps,
            j_count: 2 * self.j_count,
            ..*self
        }
    }
}

/// `⌊(r_hi − r_lo)/δ⌋`, with a small allowance for rounding.
pub fn max_levels(spec: &JumpSpec) -> usize {
    ((spec.r_hi - spec.r_lo) / spec.delta + 1e-9).floor() as usize
}

/// One more than the number of admissible levels `r_lo + hδ < r_hi`, so that
/// `h = 1..H−1` lists them all. Exceeds [`max_levels`] by one when
/// `(r_hi − r_lo)/δ` is not a whole number.
pub fn full_levels(spec: &JumpSpec) -> usize {
    let mut h = max_levels(spec);
    while spec.contains(spec.r_lo + h as f64 * spec.delta) {
        h += 1;
    }
    while h > 1 && !spec.contains(spec.r_lo + (h - 1) as f64 * spec.delta) {
        h -= 1;
    }
    h
}

/// Values `ψ[h][j]` at one time level, `h = 1..H−1`, `j = 0..J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub pi: f64,
    levels: usize,
    width: usize,
    values: Vec<f64>,
}

impl Lattice {
    pub fn zeros(grid: &Grid, pi: f64) -> Self {
        Self {
            pi,
            levels: grid.levels(),
            width: grid.j_count + 1,
            values: vec![0.0; grid.levels() * (grid.j_count + 1)],
        }
    }

    /// Lattice filled from `f(r_h, z_j)`.
    pub fn from_fn(grid: &Grid, spec: &JumpSpec, pi: f64, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut lat = Self::zeros(grid, pi);
        for h in 1..grid.h_count {
            let r = grid.rate(spec, h);
            for j in 0..=grid.j_count {
                lat.set(h, j, f(r, grid.z(j)));
            }
        }
        lat
    }

    /// Number of ECB levels stored (`H − 1`).
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of short-rate nodes stored (`J + 1`).
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, h: usize, j: usize) -> f64 {
        self.values[(h - 1) * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, h: usize, j: usize, v: f64) {
        self.values[(h - 1) * self.width + j] = v;
    }

    /// Row of ECB level `h` (1-based), `j = 0..J`.
    #[inline]
    pub fn row(&self, h: usize) -> &[f64] {
        &self.values[(h - 1) * self.width..h * self.width]
    }

    #[inline]
    pub fn row_mut(&mut self, h: usize) -> &mut [f64] {
        &mut self.values[(h - 1) * self.width..h * self.width]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Smallest `C` with `|ψ[h][j]| ≤ C(1 + |π| + z_j)`.
    pub fn growth_constant(&self, grid: &Grid) -> f64 {
        let mut c = 0.0f64;
        for h in 1..=self.levels {
            for (j, v) in self.row(h).iter().enumerate() {
                c = c.max(v.abs() / (1.0 + self.pi.abs() + grid.z(j)));
            }
        }
        c
    }

    /// `self ← a·self + b·other`.
    pub fn axpby(&mut self, a: f64, b: f64, other: &Lattice) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x = a * *x + b * y;
        }
    }

    /// CSV with columns `h, r_h, j, z_j, value`.
    pub fn write_csv<W: Write>(&self, mut out: W, grid: &Grid, spec: &JumpSpec) -> io::Result<()> {
        writeln!(out, "h,r_h,j,z_j,value")?;
        for h in 1..=self.levels {
            let r = grid.rate(spec, h);
            for (j, v) in self.row(h).iter().enumerate() {
                writeln!(out, "{h},{r},{j},{},{v:e}", grid.z(j))?;
            }
        }
        Ok(())
    }
}
