//! Backward recursion across observation dates.
//!
//! Each interval is solved per inflation value by the PDE stepper; between
//! intervals the Gaussian inflation update is integrated out with the
//! operator
//!
//! ```text
//! Bf(π, r, z) = E[ f(γ(π, r, z) + ε, r, z) ],   ε ~ N(0, v²)
//! ```
//!
//! evaluated by Gauss–Hermite quadrature, with `f` interpolated linearly along
//! the inflation grid (and extrapolated linearly beyond it).

use std::io::{self, Write};
use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;
use rayon::prelude::*;

use crate::error::{PricingError, Result};
use crate::model::{JumpSpec, ModelParams};
use crate::payoff::Payoff;
use crate::pde::{Grid, IntervalSolver, JumpWeights, Lattice};

/// Default number of Gauss–Hermite nodes.
pub const DEFAULT_QUAD_NODES: usize = 20;
/// Default number of inflation grid points.
pub const DEFAULT_PI_POINTS: usize = 201;

/// Uniform inflation grid `π_min..π_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflationGrid {
    pub pi_min: f64,
    pub pi_max: f64,
    pub count: usize,
}

impl InflationGrid {
    pub fn new(pi_min: f64, pi_max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(pi_max > pi_min) {
            return Err(PricingError::Config(format!(
                "inflation grid needs pi_min < pi_max and at least 2 points, got [{pi_min}, {pi_max}] x {count}"
            )));
        }
        Ok(Self {
            pi_min,
            pi_max,
            count,
        })
    }

    /// `π* ± (6v + |β|(r_hi + z_max))`.
    pub fn covering(params: &ModelParams, z_max: f64, count: usize) -> Result<Self> {
        let inf = &params.inflation;
        let half = 6.0 * inf.v + inf.beta.abs() * (params.jumps.r_hi + z_max);
        Self::new(inf.pi_star - half, inf.pi_star + half, count)
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.pi_max - self.pi_min) / (self.count - 1) as f64
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.pi_min + i as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    /// Cell index `i` and weight `t` with `x = (1−t)π_i + tπ_{i+1}`; `t` may
    /// fall outside `[0, 1]` beyond the grid ends.
    #[inline]
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.pi_min) / self.step();
        let i = (s.floor().max(0.0) as usize).min(self.count - 2);
        (i, s - i as f64)
    }

    /// Linear interpolation of nodal values `ys(i)` at `x`.
    #[inline]
    pub fn interpolate(&self, x: f64, ys: impl Fn(usize) -> f64) -> f64 {
        let (i, t) = self.locate(x);
        (1.0 - t) * ys(i) + t * ys(i + 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.pi_min && x <= self.pi_max
    }
}

/// Quadrature for expectations of a standard normal variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    abscissae: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn gauss_hermite(nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(PricingError::Config(format!(
                "Gauss-Hermite rule needs at least 2 nodes, got {nodes}"
            )));
        }
        let rule = GaussHermite::new(NonZeroUsize::new(nodes).expect("checked above"));
        let (xs, ws): (Vec<f64>, Vec<f64>) = rule.iter().map(|(x, w)| (*x, *w)).unzip();
        let total: f64 = ws.iter().sum();
        Ok(Self {
            abscissae: xs.iter().map(|x| std::f64::consts::SQRT_2 * x).collect(),
            weights: ws.iter().map(|w| w / total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `E[f(Z)]`, `Z ~ N(0, 1)`.
    #[inline]
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.abscissae
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `Bf(π, r, z)` for a function `f` of inflation alone (the `(r, z)`
/// arguments of `f` are held fixed by the caller).
pub fn apply_b(
    f: impl Fn(f64) -> f64,
    pi: f64,
    r: f64,
    z: f64,
    params: &ModelParams,
    quad: &Quadrature,
) -> f64 {
    let mean = params.gamma(pi, r, z);
    let v = params.inflation.v;
    quad.expect(|x| f(mean + v * x))
}

/// Value function on the inflation grid at one observation date.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurface {
    pub pi_grid: InflationGrid,
    /// One lattice per inflation grid point.
    pub lattices: Vec<Lattice>,
    /// Observation index `i` the surface belongs to.
    pub interval: usize,
}

impl ValueSurface {
    #[inline]
    pub fn value(&self, pi_index: usize, h: usize, j: usize) -> f64 {
        self.lattices[pi_index].get(h, j)
    }

    /// Nodal values along `π` interpolated at `pi` for level `h`, node `j`.
    pub fn along_pi(&self, pi: f64, h: usize, j: usize) -> f64 {
        self.pi_grid.interpolate(pi, |i| self.value(i, h, j))
    }

    /// Lattice at inflation `pi`, interpolated linearly between grid points.
    pub fn slice(&self, pi: f64) -> Lattice {
        let (i, t) = self.pi_grid.locate(pi);
        let mut out = self.lattices[i].clone();
        out.axpby(1.0 - t, t, &self.lattices[i + 1]);
        out.pi = pi;
        out
    }

    /// CSV with columns `pi, r, z, value`.
    pub fn write_csv<W: Write>(&self, mut out: W, grid: &Grid, spec: &JumpSpec) -> io::Result<()> {
        writeln!(out, "pi,r,z,value")?;
        for lat in &self.lattices {
            for h in 1..grid.h_count {
                let r = grid.rate(spec, h);
                for (j, v) in lat.row(h).iter().enumerate() {
                    writeln!(out, "{},{r},{},{v:e}", lat.pi, grid.z(j))?;
                }
            }
        }
        Ok(())
    }
}

/// Applies `B` to a completed surface, giving the terminal data of the
/// preceding interval.
fn b_of_surface(
    surface: &ValueSurface,
    grid: &Grid,
    params: &ModelParams,
    quad: &Quadrature,
) -> Vec<Lattice> {
    let pi_grid = &surface.pi_grid;
    (0..pi_grid.count)
        .into_par_iter()
        .map(|a| {
            let pi = pi_grid.value(a);
            Lattice::from_grid_fn(grid, &params.jumps, pi, |h, j, r, z| {
                apply_b(|x| surface.along_pi(x, h, j), pi, r, z, params, quad)
            })
        })
        .collect()
}

impl Lattice {
    fn from_grid_fn(
        grid: &Grid,
        spec: &JumpSpec,
        pi: f64,
        mut f: impl FnMut(usize, usize, f64, f64) -> f64,
    ) -> Self {
        let mut lat = Lattice::zeros(grid, pi);
        for h in 1..grid.h_count {
            let r = grid.rate(spec, h);
            for j in 0..=grid.j_count {
                lat.set(h, j, f(h, j, r, grid.z(j)));
            }
        }
        lat
    }
}

/// Time-0 value surface from the payoff by backward recursion over the
/// `M` observation intervals. `progress` is called with each interval index
/// `i = M−1, ..., 0` once its solves are complete.
pub fn chain(
    payoff: &dyn Payoff,
    grid: &Grid,
    pi_grid: &InflationGrid,
    params: &ModelParams,
    quad: &Quadrature,
    mut progress: impl FnMut(usize),
) -> Result<ValueSurface> {
    let intervals = params.inflation.intervals;
    if intervals < 1 {
        return Err(PricingError::Config("M must be at least 1".into()));
    }
    let solver = IntervalSolver::new(grid, params)?;
    let shared_jumps = (!params.jumps.depends_on_pi()).then(|| JumpWeights::build(grid, params, 0.0));

    // Ψ^{M−1} = BΦ, with Φ evaluated in closed form.
    let mut terminal: Vec<Lattice> = (0..pi_grid.count)
        .into_par_iter()
        .map(|a| {
            let pi = pi_grid.value(a);
            Lattice::from_fn(grid, &params.jumps, pi, |r, z| {
                apply_b(|x| payoff.value(x, r, z), pi, r, z, params, quad)
            })
        })
        .collect();

    let mut i = intervals;
    loop {
        i -= 1;
        let lattices = terminal
            .par_iter()
            .map(|term| match &shared_jumps {
                Some(jw) => solver.solve_interval(term, jw),
                None => solver.solve_interval(term, &JumpWeights::build(grid, params, term.pi)),
            })
            .collect::<Result<Vec<_>>>()?;
        let surface = ValueSurface {
            pi_grid: *pi_grid,
            lattices,
            interval: i,
        };
        progress(i);
        if i == 0 {
            return Ok(surface);
        }
        terminal = b_of_surface(&surface, grid, params, quad);
    }
}

/// Time-0 lattice when the payoff, `λ` and `p` do not depend on inflation:
/// no inflation update matters, so one solve over the whole horizon `MΘ`
/// replaces the recursion.
pub fn single_horizon(payoff: &dyn Payoff, grid: &Grid, params: &ModelParams) -> Result<Lattice> {
    if payoff.depends_on_pi() || params.jumps.depends_on_pi() {
        return Err(PricingError::Config(
            "single-horizon solve requires inflation-independent payoff and jump law".into(),
        ));
    }
    let solver = IntervalSolver::new(grid, params)?;
    let jw = JumpWeights::build(grid, params, 0.0);
    let terminal = Lattice::from_fn(grid, &params.jumps, 0.0, |r, z| payoff.value(0.0, r, z));
    solver.run(&terminal, &jw, grid.n_steps * params.inflation.intervals)
}

/// Result of [`price_at`]; `clamped` flags a query outside the grid hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolated {
    pub value: f64,
    pub clamped: bool,
}

/// Surface value at `(π, r, z)`: linear in `π` and `z`, with `r` snapped to
/// the nearest lattice level.
pub fn price_at(surface: &ValueSurface, grid: &Grid, spec: &JumpSpec, pi: f64, r: f64, z: f64) -> Interpolated {
    let mut clamped = false;
    let pg = &surface.pi_grid;
    let pi_c = pi.clamp(pg.pi_min, pg.pi_max);
    clamped |= pi_c != pi;
    let z_c = z.clamp(0.0, grid.z_max);
    clamped |= z_c != z;

    let raw_h = ((r - spec.r_lo) / spec.delta).round();
    let h = raw_h.clamp(1.0, (grid.h_count - 1) as f64);
    clamped |= h != raw_h || (r - grid.rate(spec, h as usize)).abs() > 0.5 * spec.delta + 1e-12;
    let h = h as usize;

    let dz = grid.dz();
    let s = z_c / dz;
    let j = (s.floor() as usize).min(grid.j_count - 1);
    let t = s - j as f64;
    let at = |jj: usize| surface.along_pi(pi_c, h, jj);
    Interpolated {
        value: (1.0 - t) * at(j) + t * at(j + 1),
        clamped,
    }
}
