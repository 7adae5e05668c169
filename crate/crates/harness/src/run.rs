//! Experiment drivers, one per [`Mode`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ecb_pricing::model::{Intensity, Volatility};
use ecb_pricing::pde::{Grid, Lattice};
use ecb_pricing::recursion::{chain, price_at, single_horizon, InflationGrid, Quadrature, ValueSurface};
use ecb_pricing::simulator::{mc_price, McEstimate};
use ecb_pricing::{ModelParams, PricingError};

use crate::analytics::{profile_csv, relative_errors, ErrorReport, RungErrors};
use crate::config::{Mode, RunConfig, Rung};
use crate::oracle::cir_bond_oracle_in;
use crate::HarnessError;

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub mode: Mode,
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// False when a check carried by the mode failed (cross-check only).
    pub passed: bool,
}

/// Runs `cfg.mode` silently.
pub fn run(cfg: &RunConfig) -> Result<Outcome, HarnessError> {
    run_with_log(cfg, |_| {})
}

/// Runs `cfg.mode`, reporting progress lines to `log`.
pub fn run_with_log(cfg: &RunConfig, mut log: impl FnMut(&str)) -> Result<Outcome, HarnessError> {
    let params = cfg.params()?;
    let report = params.validate();
    if !report.is_ok() {
        return Err(HarnessError::Validation(report.to_string()));
    }
    let mut ctx = Context {
        cfg,
        params,
        files: Vec::new(),
        summary: String::new(),
    };
    writeln!(ctx.summary, "mode: {}", cfg.mode).unwrap();
    for w in report.warnings() {
        writeln!(ctx.summary, "{w}").unwrap();
    }
    fs::create_dir_all(&cfg.output).map_err(|e| io_error(&cfg.output, e))?;
    let passed = match cfg.mode {
        Mode::PricePde => ctx.price_pde(&mut log)?,
        Mode::PriceMc => ctx.price_mc()?,
        Mode::Convergence => ctx.convergence(&mut log)?,
        Mode::CrossCheck => ctx.cross_check(&mut log)?,
        Mode::CirOracle => ctx.cir_oracle()?,
    };
    let summary = ctx.summary.clone();
    ctx.write("summary.txt", &summary)?;
    Ok(Outcome {
        mode: cfg.mode,
        files: ctx.files,
        summary,
        passed,
    })
}

fn io_error(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

struct Context<'a> {
    cfg: &'a RunConfig,
    params: ModelParams,
    files: Vec<PathBuf>,
    summary: String,
}

impl Context<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), HarnessError> {
        let path = self.cfg.output.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn quadrature(&self) -> Result<Quadrature, HarnessError> {
        Ok(Quadrature::gauss_hermite(self.cfg.inflation_grid.quad_nodes)?)
    }

    fn surface(&self, grid: &Grid, pi_grid: &InflationGrid, log: &mut dyn FnMut(&str)) -> Result<ValueSurface, HarnessError> {
        let payoff = self.cfg.payoff.build();
        let quad = self.quadrature()?;
        let label = format!("{}x{}", grid.n_steps, grid.j_count);
        Ok(chain(&payoff, grid, pi_grid, &self.params, &quad, |i| {
            log(&format!("{label}: interval {i} done"))
        })?)
    }

    fn describe_grid(&mut self, grid: &Grid) {
        writeln!(
            self.summary,
            "grid: H = {}, J = {}, N = {}, z_max = {}, M = {}",
            grid.h_count, grid.j_count, grid.n_steps, grid.z_max, self.params.inflation.intervals
        )
        .unwrap();
    }

    fn price_pde(&mut self, log: &mut dyn FnMut(&str)) -> Result<bool, HarnessError> {
        let grid = self.cfg.grid(&self.params)?;
        let pi_grid = self.cfg.pi_grid(&self.params)?;
        self.describe_grid(&grid);
        let surface = self.surface(&grid, &pi_grid, log)?;
        let mut csv = Vec::new();
        surface
            .write_csv(&mut csv, &grid, &self.params.jumps)
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        self.write("surface.csv", &String::from_utf8(csv).expect("ascii csv"))?;
        if let Some(init) = self.cfg.initial {
            let p = price_at(&surface, &grid, &self.params.jumps, init.pi, init.r, init.z);
            writeln!(
                self.summary,
                "price at (pi = {}, r = {}, z = {}): {:.10}{}",
                init.pi,
                init.r,
                init.z,
                p.value,
                if p.clamped { " (clamped to grid)" } else { "" }
            )
            .unwrap();
        }
        Ok(true)
    }

    fn price_mc(&mut self) -> Result<bool, HarnessError> {
        let init = self.cfg.initial_state()?;
        let payoff = self.cfg.payoff.build();
        let t = self.params.maturity();
        let est = mc_price(&self.params, &payoff, init, t, self.cfg.mc.dt, self.cfg.mc.paths, self.cfg.seed)?;
        self.write("mc.csv", &format!("{}\n{}\n", McEstimate::CSV_HEADER, est.csv_row()))?;
        writeln!(
            self.summary,
            "mc price at (pi = {}, r = {}, z = {}), T = {t}: {:.10} +/- {:.3e} ({} paths, dt = {}, seed = {})",
            init.pi, init.r, init.z, est.price, est.std_error, est.n_paths, est.dt, est.seed
        )
        .unwrap();
        Ok(true)
    }

    fn convergence(&mut self, log: &mut dyn FnMut(&str)) -> Result<bool, HarnessError> {
        let ladder = self.cfg.ladder.clone();
        if ladder.is_empty() {
            return Err(PricingError::Config("convergence needs a ladder".into()).into());
        }
        let pi = self.cfg.initial_state()?.pi;
        let pi_grid = self.cfg.pi_grid(&self.params)?;
        let report = convergence_report(self.cfg, &self.params, &pi_grid, pi, &ladder, log)?;
        writeln!(
            self.summary,
            "convergence at pi = {pi}, T = {}, pi grid [{}, {}] x {}",
            self.params.maturity(),
            pi_grid.pi_min,
            pi_grid.pi_max,
            pi_grid.count
        )
        .unwrap();
        self.write("errors.csv", &report.to_csv())?;
        let first = &report.rows[0].errors;
        self.write("error_profile.csv", &profile_csv(first))?;
        for row in &report.rows {
            self.write(&format!("error_profile_{}.csv", row.errors.label), &profile_csv(&row.errors))?;
        }
        self.summary.push_str(&report.to_csv());
        Ok(true)
    }

    fn cross_check(&mut self, log: &mut dyn FnMut(&str)) -> Result<bool, HarnessError> {
        let cc = self
            .cfg
            .cross_check
            .clone()
            .ok_or_else(|| PricingError::Config("[cross_check] section is required".into()))?;
        let init = self.cfg.initial_state()?;
        let grid = self.cfg.grid(&self.params)?;
        let pi_grid = self.cfg.pi_grid(&self.params)?;
        self.describe_grid(&grid);
        let surface = self.surface(&grid, &pi_grid, log)?;
        let payoff = self.cfg.payoff.build();
        let t = self.params.maturity();
        let mut csv = String::from("pi,r,z,pde,mc,std_error,ratio\n");
        let mut worst: f64 = 0.0;
        for (i, &[r, z]) in cc.probes.iter().enumerate() {
            let pde = price_at(&surface, &grid, &self.params.jumps, init.pi, r, z);
            let start = ecb_pricing::simulator::InitialState { pi: init.pi, r, z };
            let seed = self.cfg.seed.wrapping_add(i as u64);
            let mc = mc_price(&self.params, &payoff, start, t, self.cfg.mc.dt, self.cfg.mc.paths, seed)?;
            let ratio = (pde.value - mc.price).abs() / mc.std_error;
            worst = worst.max(ratio);
            log(&format!("probe r = {r}, z = {z}: pde {:.8} mc {:.8} se {:.2e}", pde.value, mc.price, mc.std_error));
            writeln!(csv, "{},{r},{z},{:e},{:e},{:e},{ratio:.4}", init.pi, pde.value, mc.price, mc.std_error).unwrap();
            if pde.clamped {
                writeln!(self.summary, "warning: probe ({r}, {z}) is off the lattice").unwrap();
            }
        }
        self.write("cross_check.csv", &csv)?;
        let passed = worst <= cc.max_std_errors;
        writeln!(
            self.summary,
            "cross-check: worst |pde - mc| / se = {worst:.4} (limit {}) {}",
            cc.max_std_errors,
            if passed { "ok" } else { "FAILED" }
        )
        .unwrap();
        Ok(passed)
    }

    fn cir_oracle(&mut self) -> Result<bool, HarnessError> {
        let (k, sigma) = cir_parameters(&self.params)?;
        let grid = self.cfg.grid(&self.params)?;
        self.describe_grid(&grid);
        let t = self.params.maturity();
        let bond = single_horizon(&ecb_pricing::payoff::Constant(1.0), &grid, &self.params)?;
        let worst = cir_deviation(&bond, &grid, &self.params, t);
        let units = self.params.discount_units;
        let mut csv = String::from("r,mean,z,pde,closed_form,abs_diff\n");
        for h in 1..=grid.levels() {
            let r = grid.rate(&self.params.jumps, h);
            let mu = self.params.drift_b(r);
            for j in 0..=grid.j_count {
                let z = grid.z(j);
                let exact = cir_bond_oracle_in(units, k, mu, sigma, z, t);
                let v = bond.get(h, j);
                writeln!(csv, "{r},{mu},{z},{v:e},{exact:e},{:e}", (v - exact).abs()).unwrap();
            }
        }
        self.write("cir_oracle.csv", &csv)?;
        writeln!(
            self.summary,
            "cir oracle: k = {k}, mean = {} + {} r, sigma = {sigma}, T = {t}; max abs deviation over interior z nodes = {worst:.3e}",
            self.params.short_rate.b0, self.params.short_rate.b1
        )
        .unwrap();
        Ok(true)
    }
}

/// `(k_sh, σ)` when the ECB rate never moves and `σ̄` is constant, so each
/// level carries a CIR short rate with mean `b(r_h)`.
pub fn cir_parameters(params: &ModelParams) -> Result<(f64, f64), HarnessError> {
    let frozen = matches!(params.jumps.lambda, Intensity::Constant(l) if l == 0.0);
    match params.short_rate.sigma_bar {
        Volatility::Constant(s) if frozen => Ok((params.short_rate.k_sh, s)),
        _ => Err(PricingError::Config("cir-oracle needs lambda = 0 and a constant sigma_bar".into()).into()),
    }
}

/// Max absolute deviation of a bond lattice from the closed form over all
/// levels and the interior nodes `j = 1..J−1`.
pub fn cir_deviation(bond: &Lattice, grid: &Grid, params: &ModelParams, maturity: f64) -> f64 {
    let Ok((k, sigma)) = cir_parameters(params) else {
        return f64::NAN;
    };
    let units = params.discount_units;
    let mut worst: f64 = 0.0;
    for h in 1..=grid.levels() {
        let mu = params.drift_b(grid.rate(&params.jumps, h));
        for j in 1..grid.j_count {
            let exact = cir_bond_oracle_in(units, k, mu, sigma, grid.z(j), maturity);
            worst = worst.max((bond.get(h, j) - exact).abs());
        }
    }
    worst
}

/// Errors and orders along `ladder`. Each rung `(N, J)` is compared with
/// `(2N, 2J)`, and its order uses the `(2N, 2J)` against `(4N, 4J)` error.
pub fn convergence_report(
    cfg: &RunConfig,
    params: &ModelParams,
    pi_grid: &InflationGrid,
    pi: f64,
    ladder: &[Rung],
    log: &mut dyn FnMut(&str),
) -> Result<ErrorReport, HarnessError> {
    let payoff = cfg.payoff.build();
    let quad = Quadrature::gauss_hermite(cfg.inflation_grid.quad_nodes)?;
    let mut cache: BTreeMap<(usize, usize), Lattice> = BTreeMap::new();
    let mut lattice = |n: usize, j: usize, log: &mut dyn FnMut(&str)| -> Result<Lattice, HarnessError> {
        if let Some(l) = cache.get(&(n, j)) {
            return Ok(l.clone());
        }
        let mut grid = Grid::for_model(params, n, j, cfg.grid.z_max);
        if let Some(h) = cfg.grid.h_count {
            grid.h_count = h;
        }
        grid.validate(params)?;
        let surface = chain(&payoff, &grid, pi_grid, params, &quad, |_| {})?;
        log(&format!("solved {n}x{j}"));
        let slice = surface.slice(pi);
        cache.insert((n, j), slice.clone());
        Ok(slice)
    };
    let h_count = cfg.grid.h_count.unwrap_or_else(|| ecb_pricing::pde::max_levels(&params.jumps));
    let rates: Vec<f64> = (1..h_count).map(|h| params.jumps.r_lo + h as f64 * params.jumps.delta).collect();
    let mut errors: Vec<RungErrors> = Vec::new();
    let mut doubled = Vec::new();
    for rung in ladder {
        let (n, j) = (rung.n_steps(), rung.j_count());
        let l1 = lattice(n, j, log)?;
        let l2 = lattice(2 * n, 2 * j, log)?;
        let l4 = lattice(4 * n, 4 * j, log)?;
        errors.push(relative_errors(&rung.label(), &l1, &l2, &rates)?);
        doubled.push(relative_errors(&format!("{}x{}", 2 * n, 2 * j), &l2, &l4, &rates)?);
    }
    Ok(ErrorReport::new(errors, doubled))
}
