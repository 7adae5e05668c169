use super::Grid;
use crate::error::{PricingError, Result};
use crate::model::ModelParams;

/// Scheme coefficients `ν, ξ, η, θ, w` on `h = 1..H−1`, `j = 0..J−1`.
///
/// ```text
/// ν[h][j] = k_sh (b(r_h) − z_j) Δτ / (4Δz)
/// ξ[h][j] = z_j σ̄²(|r_h − z_j|²) Δτ / (4Δz²)      j ≥ 1
/// ξ[h][0] = (3/4) k_sh b(r_h) Δτ / Δz
/// η = ξ + ν,  θ = ν − ξ,  w = 2ξ + (Δτ/2)d_j + 1
/// ```
///
/// where `d_j` is `z_j` in discount units (`z_j/100` by default).
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub dtau: f64,
    levels: usize,
    width: usize,
    pub nu: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub theta_c: Vec<f64>,
    pub w: Vec<f64>,
    /// `z_j` as used in the discount term.
    pub discount: Vec<f64>,
}

impl Coefficients {
    /// Coefficients for the time step `Δτ = Θ/N`.
    pub fn build(grid: &Grid, params: &ModelParams) -> Self {
        let dtau = params.inflation.theta / grid.n_steps.max(1) as f64;
        Self::with_dtau(grid, params, dtau)
    }

    pub fn with_dtau(grid: &Grid, params: &ModelParams, dtau: f64) -> Self {
        let levels = grid.levels();
        let width = grid.j_count;
        let n = levels * width;
        let dz = grid.dz();
        let k_sh = params.short_rate.k_sh;
        let mut c = Self {
            dtau,
            levels,
            width,
            nu: vec![0.0; n],
            xi: vec![0.0; n],
            eta: vec![0.0; n],
            theta_c: vec![0.0; n],
            w: vec![0.0; n],
            discount: (0..width).map(|j| params.discount_rate(grid.z(j))).collect(),
        };
        for h in 1..=levels {
            let r = grid.rate(&params.jumps, h);
            let b = params.drift_b(r);
            for j in 0..width {
                let z = grid.z(j);
                let i = c.idx(h, j);
                let nu = k_sh * (b - z) * dtau / (4.0 * dz);
                let xi = if j == 0 {
                    0.75 * k_sh * b * dtau / dz
                } else {
                    let q = (r - z) * (r - z);
                    z * params.sigma_bar_sq(q) * dtau / (4.0 * dz * dz)
                };
                c.nu[i] = nu;
                c.xi[i] = xi;
                c.eta[i] = xi + nu;
                c.theta_c[i] = nu - xi;
                c.w[i] = 2.0 * xi + 0.5 * dtau * c.discount[j] + 1.0;
            }
        }
        c
    }

    #[inline]
    fn idx(&self, h: usize, j: usize) -> usize {
        (h - 1) * self.width + j
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Matrix dimension `J`.
    pub fn size(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn nu(&self, h: usize, j: usize) -> f64 {
        self.nu[self.idx(h, j)]
    }
    #[inline]
    pub fn xi(&self, h: usize, j: usize) -> f64 {
        self.xi[self.idx(h, j)]
    }
    #[inline]
    pub fn eta(&self, h: usize, j: usize) -> f64 {
        self.eta[self.idx(h, j)]
    }
    #[inline]
    pub fn theta_c(&self, h: usize, j: usize) -> f64 {
        self.theta_c[self.idx(h, j)]
    }
    #[inline]
    pub fn w(&self, h: usize, j: usize) -> f64 {
        self.w[self.idx(h, j)]
    }

    /// Row-wise dominance margin `|diag| − Σ|off-diag|` of `A_h` at row `j`,
    /// including the modified first and last rows.
    pub fn dominance_margin(&self, h: usize, j: usize) -> f64 {
        let last = self.width - 1;
        if j == 0 {
            let nu = self.nu(h, 0);
            (1.0 + self.xi(h, 0)).abs() - 4.0 * nu.abs() - nu.abs()
        } else if j == last {
            (self.w(h, j) - self.eta(h, j)).abs() - self.theta_c(h, j).abs()
        } else {
            self.w(h, j).abs() - self.theta_c(h, j).abs() - self.eta(h, j).abs()
        }
    }

    /// Smallest dominance margin over every `(h, j)` and where it occurs.
    pub fn min_dominance_margin(&self) -> (usize, usize, f64) {
        let mut worst = (1, 0, f64::INFINITY);
        for h in 1..=self.levels {
            for j in 0..self.width {
                let m = self.dominance_margin(h, j);
                if m < worst.2 {
                    worst = (h, j, m);
                }
            }
        }
        worst
    }

    /// Fails with the first row that is not strictly diagonally dominant.
    pub fn check_dominance(&self) -> Result<()> {
        for h in 1..=self.levels {
            for j in 0..self.width {
                let margin = self.dominance_margin(h, j);
                if !(margin > 0.0) {
                    return Err(PricingError::GridRefinement { h, j, margin });
                }
            }
        }
        Ok(())
    }
}

/// Explicit jump-term weights `λ(π, r_h) p(π, r_h, kδ)` for every level,
/// restricted to destinations inside the lattice:
/// `k ∈ [−min(m, h−1), min(m, H−h−1)]`, `k ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpWeights {
    rows: Vec<Vec<(i32, f64)>>,
}

impl JumpWeights {
    pub fn build(grid: &Grid, params: &ModelParams, pi: f64) -> Self {
        let spec = &params.jumps;
        let m = spec.m as i64;
        let big_h = grid.h_count as i64;
        let rows = (1..grid.h_count)
            .map(|h| {
                let r = grid.rate(spec, h);
                let lam = spec.intensity(pi, r);
                let h = h as i64;
                let lo = -m.min(h - 1);
                let hi = m.min(big_h - h - 1);
                (lo..=hi)
                    .filter(|&k| k != 0)
                    .map(|k| (k as i32, lam * spec.prob(pi, r, k as i32)))
                    .filter(|&(_, wgt)| wgt != 0.0)
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// Nonzero `(k, λp)` pairs for level `h` (1-based).
    #[inline]
    pub fn row(&self, h: usize) -> &[(i32, f64)] {
        &self.rows[h - 1]
    }

    /// Total rate of jumps kept on the lattice from level `h`.
    pub fn retained_intensity(&self, h: usize) -> f64 {
        self.row(h).iter().map(|&(_, w)| w).sum()
    }
}
