use super::{BandedMatrix, Coefficients, Factorized, Grid, JumpWeights, Lattice};
use crate::error::{PricingError, Result};
use crate::model::ModelParams;

const RESIDUAL_TOL: f64 = 1e-10;

/// Assembles `A_h`:
///
/// ```text
/// row 0      : 1+ξ₀, −4ν₀, ν₀
/// row j      : θ_j, w_j, −η_j
/// row J−1    : θ_{J−1}, w_{J−1} − η_{J−1}   (Neumann at z_max)
/// ```
pub fn assemble_system(coeffs: &Coefficients, h: usize) -> Result<BandedMatrix> {
    let n = coeffs.size();
    for j in 0..n {
        let margin = coeffs.dominance_margin(h, j);
        if !(margin > 0.0) {
            return Err(PricingError::GridRefinement { h, j, margin });
        }
    }
    let nu0 = coeffs.nu(h, 0);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for j in 1..n {
        lower[j] = coeffs.theta_c(h, j);
        diag[j] = coeffs.w(h, j);
        upper[j] = -coeffs.eta(h, j);
    }
    diag[n - 1] -= coeffs.eta(h, n - 1);
    upper[n - 1] = 0.0;
    Ok(BandedMatrix {
        first: [1.0 + coeffs.xi(h, 0), -4.0 * nu0, nu0],
        lower,
        diag,
        upper,
    })
}

/// Explicit jump sum `Σ_k λp_k (ψ[h+k][j] − ψ[h][j])` at `(h, j)`.
#[inline]
fn jump_sum(lattice: &Lattice, jumps: &JumpWeights, h: usize, j: usize) -> f64 {
    let centre = lattice.get(h, j);
    jumps
        .row(h)
        .iter()
        .map(|&(k, wgt)| wgt * (lattice.get((h as i64 + k as i64) as usize, j) - centre))
        .sum()
}

/// Right-hand side `K_h` of level `h` from the lattice at step `n`.
pub fn rhs_row(lattice: &Lattice, coeffs: &Coefficients, jumps: &JumpWeights, h: usize, out: &mut [f64]) {
    let dtau = coeffs.dtau;
    let psi = lattice.row(h);
    let n = coeffs.size();
    let nu0 = coeffs.nu(h, 0);
    out[0] = psi[0]
        + nu0 * (-psi[2] + 4.0 * psi[1] - 3.0 * psi[0])
        + dtau * jump_sum(lattice, jumps, h, 0);
    for j in 1..n {
        let nu = coeffs.nu(h, j);
        let xi = coeffs.xi(h, j);
        let discount = 0.5 * dtau * coeffs.discount[j];
        out[j] = psi[j]
            + nu * (psi[j + 1] - psi[j - 1])
            + xi * (psi[j + 1] - 2.0 * psi[j] + psi[j - 1])
            + dtau * jump_sum(lattice, jumps, h, j)
            - discount * psi[j];
    }
}

/// `K_h^n` for every level `h = 1..H−1`.
pub fn build_rhs(lattice: &Lattice, coeffs: &Coefficients, jumps: &JumpWeights, grid: &Grid) -> Vec<Vec<f64>> {
    (1..grid.h_count)
        .map(|h| {
            let mut k = vec![0.0; grid.j_count];
            rhs_row(lattice, coeffs, jumps, h, &mut k);
            k
        })
        .collect()
}

/// Time stepper for one grid: coefficients are built and each `A_h` is
/// factorised once, then reused for every step and every inflation value.
#[derive(Debug, Clone)]
pub struct IntervalSolver {
    grid: Grid,
    coeffs: Coefficients,
    factors: Vec<Factorized>,
}

impl IntervalSolver {
    pub fn new(grid: &Grid, params: &ModelParams) -> Result<Self> {
        grid.validate(params)?;
        let coeffs = Coefficients::build(grid, params);
        Self::from_coefficients(grid, coeffs)
    }

    pub fn from_coefficients(grid: &Grid, coeffs: Coefficients) -> Result<Self> {
        coeffs.check_dominance()?;
        let factors = (1..grid.h_count)
            .map(|h| assemble_system(&coeffs, h)?.factorize())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: *grid,
            coeffs,
            factors,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn matrix(&self, h: usize) -> &BandedMatrix {
        self.factors[h - 1].matrix()
    }

    /// Advances one time step `n → n+1`.
    pub fn step(&self, lattice: &Lattice, jumps: &JumpWeights) -> Result<Lattice> {
        let mut next = lattice.clone();
        self.step_into(lattice, jumps, &mut next, &mut vec![0.0; self.grid.j_count])?;
        Ok(next)
    }

    fn step_into(&self, lattice: &Lattice, jumps: &JumpWeights, next: &mut Lattice, rhs: &mut [f64]) -> Result<()> {
        let big_j = self.grid.j_count;
        for h in 1..self.grid.h_count {
            rhs_row(lattice, &self.coeffs, jumps, h, rhs);
            let factor = &self.factors[h - 1];
            let row = next.row_mut(h);
            factor.solve_into(rhs, &mut row[..big_j]);
            let residual = factor.residual(&row[..big_j], rhs);
            let scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !(residual <= RESIDUAL_TOL * scale) {
                return Err(PricingError::Numerical {
                    module: "pde-solver",
                    location: format!("level h={h}, pi={}", lattice.pi),
                    detail: format!("residual {residual:e} exceeds {RESIDUAL_TOL:e} x {scale:e}"),
                });
            }
            row[big_j] = row[big_j - 1];
        }
        Ok(())
    }

    /// Applies `steps` time steps to `terminal`.
    pub fn run(&self, terminal: &Lattice, jumps: &JumpWeights, steps: usize) -> Result<Lattice> {
        let mut cur = terminal.clone();
        let mut next = terminal.clone();
        let mut rhs = vec![0.0; self.grid.j_count];
        for _ in 0..steps {
            self.step_into(&cur, jumps, &mut next, &mut rhs)?;
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// One observation interval: `N` steps of `Δτ = Θ/N`.
    pub fn solve_interval(&self, terminal: &Lattice, jumps: &JumpWeights) -> Result<Lattice> {
        self.run(terminal, jumps, self.grid.n_steps)
    }
}

/// One time step at inflation value `pi`.
pub fn step(lattice: &Lattice, grid: &Grid, params: &ModelParams, pi: f64) -> Result<Lattice> {
    let solver = IntervalSolver::new(grid, params)?;
    solver.step(lattice, &JumpWeights::build(grid, params, pi))
}

/// Solves the interval `[0, Θ]` backwards from `terminal`.
pub fn solve_interval(terminal: &Lattice, grid: &Grid, params: &ModelParams, pi: f64) -> Result<Lattice> {
    solve_intervals(terminal, grid, params, pi, 1)
}

/// Solves `intervals` consecutive observation intervals without any
/// inflation update in between (`intervals·N` steps of `Θ/N`).
pub fn solve_intervals(
    terminal: &Lattice,
    grid: &Grid,
    params: &ModelParams,
    pi: f64,
    intervals: usize,
) -> Result<Lattice> {
    if grid.n_steps == 0 {
        return Ok(terminal.clone());
    }
    let solver = IntervalSolver::new(grid, params)?;
    solver.run(terminal, &JumpWeights::build(grid, params, pi), grid.n_steps * intervals)
}
