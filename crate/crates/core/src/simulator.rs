//! Path construction for `(Π, R, R^sh)` and Monte Carlo pricing.
//!
//! Per observation interval the dominating Poisson clock (rate `λ̄`) is laid
//! down first; each arrival moves the ECB rate by the thinned jump map. The
//! short rate is then advanced by full-truncation Euler on a uniform grid,
//! with grid steps split at arrival times so each piece sees the ECB level
//! in force. Inflation is updated at the end of each interval from the left
//! limits of the two rates.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{PricingError, Result};
use crate::model::ModelParams;
use crate::payoff::Payoff;

/// State at time 0 (rates in percent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub pi: f64,
    pub r: f64,
    pub z: f64,
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    /// Accepted ECB jump times (years).
    pub jump_times: Vec<f64>,
    /// ECB level from time 0 and after each accepted jump.
    pub ecb_levels: Vec<f64>,
    /// `Π(t_i)` for `i = 0..M`.
    pub inflation_values: Vec<f64>,
    /// `R^sh` on the Euler grid, truncated at zero, including `t = 0`.
    pub short_rate_samples: Vec<f64>,
    /// `∫₀ᵀ R^sh(s) ds` in discount units.
    pub discount_integral: f64,
    /// Euler step actually used.
    pub dt: f64,
}

impl Path {
    pub fn terminal_inflation(&self) -> f64 {
        *self.inflation_values.last().unwrap()
    }

    pub fn terminal_rate(&self) -> f64 {
        *self.ecb_levels.last().unwrap()
    }

    pub fn terminal_short_rate(&self) -> f64 {
        *self.short_rate_samples.last().unwrap()
    }

    /// `R(t)` from the piecewise-constant record.
    pub fn ecb_rate_at(&self, t: f64) -> f64 {
        let n = self.jump_times.partition_point(|&s| s <= t);
        self.ecb_levels[n]
    }
}

/// Monte Carlo price and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl McEstimate {
    /// CSV header matching [`McEstimate::csv_row`].
    pub const CSV_HEADER: &'static str = "price,std_error,n_paths,dt,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{},{},{}",
            self.price, self.std_error, self.n_paths, self.dt, self.seed
        )
    }
}

/// Terminal state of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terminal {
    pub pi: f64,
    pub r: f64,
    pub z: f64,
    pub discount_integral: f64,
}

/// Deterministic RNG for path `index` of a run seeded with `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Euler step count per observation interval and the step actually used.
fn euler_grid(params: &ModelParams, dt: f64) -> Result<(usize, f64)> {
    let theta = params.inflation.theta;
    if !(dt > 0.0) {
        return Err(PricingError::Config(format!("dt = {dt} must be positive")));
    }
    if dt > theta / 10.0 + 1e-15 {
        return Err(PricingError::Config(format!(
            "dt = {dt} exceeds theta/10 = {}",
            theta / 10.0
        )));
    }
    let steps = (theta / dt - 1e-9).ceil() as usize;
    Ok((steps, theta / steps as f64))
}

struct Engine<'a> {
    params: &'a ModelParams,
    intervals: usize,
    steps: usize,
    dt: f64,
    arrivals: Exp<f64>,
}

impl<'a> Engine<'a> {
    fn new(params: &'a ModelParams, maturity: f64, dt: f64) -> Result<Self> {
        let intervals = params.intervals_for(maturity)?;
        let (steps, dt) = euler_grid(params, dt)?;
        let arrivals = Exp::new(params.jumps.lambda_bar)
            .map_err(|e| PricingError::Config(format!("lambda_bar: {e}")))?;
        Ok(Self {
            params,
            intervals,
            steps,
            dt,
            arrivals,
        })
    }

    /// Full-truncation Euler over `tau` at ECB level `r`; returns the new
    /// untruncated state.
    #[inline]
    fn euler(&self, x: f64, r: f64, tau: f64, rng: &mut ChaCha8Rng) -> f64 {
        let sr = &self.params.short_rate;
        let xp = x.max(0.0);
        let noise: f64 = StandardNormal.sample(rng);
        let spread = r - xp;
        x + sr.k_sh * (sr.drift_b(r) - xp) * tau
            + sr.sigma_bar_sq(spread * spread).sqrt() * xp.sqrt() * tau.sqrt() * noise
    }

    fn run(&self, start: InitialState, rng: &mut ChaCha8Rng, mut record: Option<&mut Path>) -> Result<Terminal> {
        let params = self.params;
        let spec = &params.jumps;
        let theta = params.inflation.theta;
        let v = params.inflation.v;
        let mut pi = start.pi;
        let mut level: i64 = 0;
        let rate = |level: i64| start.r + level as f64 * spec.delta;
        let mut x = start.z;
        let mut integral = 0.0;
        let mut arrivals = Vec::new();

        if let Some(p) = record.as_deref_mut() {
            p.dt = self.dt;
            p.ecb_levels.push(start.r);
            p.inflation_values.push(pi);
            p.short_rate_samples.push(x.max(0.0));
        }

        for i in 0..self.intervals {
            let t0 = i as f64 * theta;
            arrivals.clear();
            let mut t = 0.0;
            loop {
                t += self.arrivals.sample(rng);
                if t >= theta {
                    break;
                }
                arrivals.push(t);
            }
            let mut next_arrival = 0;
            for n in 0..self.steps {
                let s_end = if n + 1 == self.steps {
                    theta
                } else {
                    (n + 1) as f64 * self.dt
                };
                let mut s = n as f64 * self.dt;
                // Arrivals inside (s, s_end] split the step; a tie with the
                // grid point applies the jump before the step ends.
                while next_arrival < arrivals.len() && arrivals[next_arrival] <= s_end {
                    let ta = arrivals[next_arrival];
                    next_arrival += 1;
                    // R is constant up to the arrival, so thinning can be
                    // decided first; rejected arrivals leave the grid alone.
                    let u: f64 = rng.random();
                    let k = spec.jump_map(pi, rate(level), u)?;
                    if k == 0 {
                        continue;
                    }
                    let tau = ta - s;
                    if tau > 0.0 {
                        let x_new = self.euler(x, rate(level), tau, rng);
                        integral += 0.5 * (x.max(0.0) + x_new.max(0.0)) * tau;
                        x = x_new;
                        s = ta;
                    }
                    level += k as i64;
                    if let Some(p) = record.as_deref_mut() {
                        p.jump_times.push(t0 + ta);
                        p.ecb_levels.push(rate(level));
                    }
                }
                let tau = s_end - s;
                if tau > 0.0 {
                    let x_new = self.euler(x, rate(level), tau, rng);
                    integral += 0.5 * (x.max(0.0) + x_new.max(0.0)) * tau;
                    x = x_new;
                }
                if let Some(p) = record.as_deref_mut() {
                    p.short_rate_samples.push(x.max(0.0));
                }
            }
            let eps: f64 = StandardNormal.sample(rng);
            pi = params.gamma(pi, rate(level), x.max(0.0)) + v * eps;
            if let Some(p) = record.as_deref_mut() {
                p.inflation_values.push(pi);
            }
        }

        let discount_integral = params.discount_rate(integral);
        if let Some(p) = record {
            p.discount_integral = discount_integral;
        }
        Ok(Terminal {
            pi,
            r: rate(level),
            z: x.max(0.0),
            discount_integral,
        })
    }
}

/// Simulates one path to `maturity` (a multiple of `Θ`) with Euler step at
/// most `dt`.
pub fn simulate_path(
    params: &ModelParams,
    start: InitialState,
    maturity: f64,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Path> {
    let engine = Engine::new(params, maturity, dt)?;
    let mut path = Path::default();
    engine.run(start, rng, Some(&mut path))?;
    Ok(path)
}

/// Terminal state only, without recording the trajectory.
pub fn simulate_terminal(
    params: &ModelParams,
    start: InitialState,
    maturity: f64,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Terminal> {
    Engine::new(params, maturity, dt)?.run(start, rng, None)
}

/// Sum by a fixed binary tree, independent of thread scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Monte Carlo price `E[exp(−∫R^sh) Φ(Π(T), R(T), R^sh(T))]`.
pub fn mc_price(
    params: &ModelParams,
    payoff: &dyn Payoff,
    start: InitialState,
    maturity: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_paths == 0 {
        return Err(PricingError::Config("n_paths must be positive".into()));
    }
    let engine = Engine::new(params, maturity, dt)?;
    let samples = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let t = engine.run(start, &mut rng, None)?;
            Ok((-t.discount_integral).exp() * payoff.value(t.pi, t.r, t.z))
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = n_paths as f64;
    let price = pairwise_sum(&samples) / n;
    let std_error = if n_paths > 1 {
        let dev: Vec<f64> = samples.iter().map(|x| (x - price) * (x - price)).collect();
        (pairwise_sum(&dev) / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        price,
        std_error,
        n_paths,
        dt: engine.dt,
        seed,
    })
}

/// Counts of jump multiples `k = −m..m` over `arrivals` clock arrivals at a
/// fixed `(π, r)`, using the same thinning as the path engine.
pub fn thinned_jump_counts(params: &ModelParams, pi: f64, r: f64, arrivals: usize, seed: u64) -> Result<Vec<u64>> {
    let m = params.jumps.m as i32;
    let mut counts = vec![0u64; 2 * m as usize + 1];
    let mut rng = path_rng(seed, 0);
    for _ in 0..arrivals {
        let u: f64 = rng.random();
        let k = params.jump_map(pi, r, u)?;
        counts[(k + m) as usize] += 1;
    }
    Ok(counts)
}
