//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Positional arguments filter criteria by
//! name substring.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ecb_pricing::model::{Intensity, Volatility};
use ecb_pricing::payoff::{Constant, Payoff};
use ecb_pricing::pde::{build_rhs, full_levels, Coefficients, Grid, IntervalSolver, JumpWeights, Lattice};
use ecb_pricing::recursion::{apply_b, chain, single_horizon, InflationGrid, Quadrature};
use ecb_pricing::simulator::{path_rng, simulate_path, thinned_jump_counts, InitialState};
use ecb_pricing::ModelParams;
use ecb_pricing_harness::run::{cir_deviation, convergence_report};
use ecb_pricing_harness::{run, RunConfig};

const LADDER: [usize; 5] = [30, 50, 70, 100, 150];
/// Reference `e1` per ladder rung at `T = 1` and `T = 2`.
const REFERENCE_E1_T1: [f64; 5] = [0.0117, 0.0069, 0.0049, 0.0034, 0.0023];
const REFERENCE_E1_T2: [f64; 5] = [0.0419, 0.0244, 0.0172, 0.0119, 0.0079];
const ORDER_RANGE: (f64, f64) = (0.9, 1.15);
const E1_RELATIVE_BAND: f64 = 0.5;
const CONVERGENCE_BUDGET: Duration = Duration::from_secs(300);

const CIR_TOL: f64 = 1e-3;
const CIR_BUDGET: Duration = Duration::from_secs(10);

const MC_STD_ERRORS: f64 = 3.0;
const MC_BUDGET: Duration = Duration::from_secs(120);

const MACHINE_TOL: f64 = 4.0 * f64::EPSILON;
const SECOND_MOMENT_TOL: f64 = 1e-10;
const SINUSOID_TOL: f64 = 1e-6;
const TRAPEZOID_POINTS: usize = 100_000;

const JUMP_ARRIVALS: usize = 1_000_000;
const JUMP_SDS: f64 = 4.0;
const Q_SUM_TOL: f64 = 1e-12;

const RESIDUAL_TOL: f64 = 1e-10;
const H_CONSTANT_TOL: f64 = 1e-12;

const SHORTCUT_TOL: f64 = 1e-8;

const CONFINEMENT_PATHS: u64 = 100_000;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

type Criterion = fn() -> Verdict;

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, Criterion); 8] = [
        ("convergence_order", convergence_order),
        ("cir_closed_form", cir_closed_form),
        ("mc_pde_cross_validation", mc_pde_cross_validation),
        ("b_operator_moments", b_operator_moments),
        ("jump_law", jump_law),
        ("scheme_invariants", scheme_invariants),
        ("shortcut_equivalence", shortcut_equivalence),
        ("positivity_and_confinement", positivity_and_confinement),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let verdict = check();
        let tag = if verdict.passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} [{}] {name} ({:.1} s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            verdict.detail
        );
        if !verdict.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn config(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    RunConfig::from_path(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn reference() -> ModelParams {
    ModelParams::reference()
}

fn convergence_order() -> Verdict {
    let mut passed = true;
    let mut parts = Vec::new();
    for (file, reference_e1) in [
        ("convergence-t1.toml", REFERENCE_E1_T1),
        ("convergence-t2.toml", REFERENCE_E1_T2),
    ] {
        let cfg = config(file);
        let start = Instant::now();
        let outcome = (|| {
            let params = cfg.params()?;
            let pi_grid = cfg.pi_grid(&params)?;
            let pi = cfg.initial_state()?.pi;
            convergence_report(&cfg, &params, &pi_grid, pi, &cfg.ladder, &mut |_| {}).map(|r| (params, r))
        })();
        let elapsed = start.elapsed();
        let (params, report) = match outcome {
            Ok(x) => x,
            Err(e) => {
                passed = false;
                parts.push(format!("{file}: {e}"));
                continue;
            }
        };
        let e1: Vec<f64> = report.rows.iter().map(|r| r.errors.e1).collect();
        let decreasing = e1.windows(2).all(|w| w[1] < w[0]);
        let orders: Vec<f64> = report.rows.iter().map(|r| r.order1.unwrap_or(f64::NAN)).collect();
        let orders_ok = orders.iter().all(|o| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(o));
        let band: Vec<f64> = e1.iter().zip(reference_e1).map(|(e, r)| e / r - 1.0).collect();
        let band_ok = band.iter().all(|d| d.abs() <= E1_RELATIVE_BAND);
        let on_time = elapsed <= CONVERGENCE_BUDGET;
        passed &= decreasing && orders_ok && band_ok && on_time;
        let fmt = |xs: &[f64], p: usize| xs.iter().map(|x| format!("{x:.p$}")).collect::<Vec<_>>().join("/");
        parts.push(format!(
            "T={} e1 {} {}; order1 {} {}; e1 vs reference {} {}; {:.0} s {}",
            params.maturity(),
            fmt(&e1.iter().map(|x| x * 1e3).collect::<Vec<_>>(), 2) + "e-3",
            ok(decreasing),
            fmt(&orders, 3),
            ok(orders_ok),
            fmt(&band.iter().map(|d| 100.0 * d).collect::<Vec<_>>(), 0) + "%",
            ok(band_ok),
            elapsed.as_secs_f64(),
            ok(on_time),
        ));
    }
    Verdict::new(passed, parts.join(" | "))
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "OUT"
    }
}

fn cir_closed_form() -> Verdict {
    // b1 = 0 with mean 3%, and the frozen-rate variant where every level has
    // its own mean r_h.
    let mut frozen = reference();
    frozen.jumps.lambda = Intensity::Constant(0.0);
    frozen.short_rate.sigma_bar = Volatility::Constant(0.23);
    frozen.inflation.intervals = 1;
    let cases = [("b1=0", config("cir.toml").params().expect("cir config")), ("frozen", frozen)];
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, params) in cases {
        let start = Instant::now();
        let grid = Grid::for_model(&params, 150, 150, 7.0);
        let worst = single_horizon(&Constant(1.0), &grid, &params)
            .map(|bond| cir_deviation(&bond, &grid, &params, params.inflation.theta));
        let elapsed = start.elapsed();
        match worst {
            Ok(w) => {
                let good = w <= CIR_TOL && elapsed <= CIR_BUDGET;
                passed &= good;
                parts.push(format!("{label}: max |pde - closed form| {w:.2e}, {:.2} s", elapsed.as_secs_f64()));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    Verdict::new(passed, format!("{} (limit {CIR_TOL:e})", parts.join("; ")))
}

fn mc_pde_cross_validation() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut cfg = config("cross-check.toml");
    cfg.output = dir.path().to_path_buf();
    let limit = cfg.cross_check.as_ref().map(|c| c.max_std_errors);
    if limit != Some(MC_STD_ERRORS) || cfg.mc.paths != 100_000 || cfg.mc.dt != 1e-3 || cfg.maturity != Some(1.0) {
        return Verdict::new(false, "cross-check configuration drifted from the criterion");
    }
    let start = Instant::now();
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let csv = std::fs::read_to_string(dir.path().join("cross_check.csv")).expect("cross_check.csv");
    let ratios: Vec<String> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            format!("(r={}, z={}) {}", cols[1], cols[2], cols[6])
        })
        .collect();
    let on_time = elapsed <= MC_BUDGET;
    Verdict::new(
        outcome.passed && ratios.len() == 3 && on_time,
        format!(
            "|pde - mc| / se at pi=1.52: {} (limit {MC_STD_ERRORS}), {:.0} s",
            ratios.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn b_operator_moments() -> Verdict {
    let params = reference();
    let quad = Quadrature::gauss_hermite(20).expect("quadrature");
    let v = params.inflation.v;
    let sinusoid = |x: f64| (3.0 * x).sin() + (0.5 * x).cos();
    let mut worst = [0.0f64; 4];
    for pi in [-1.0, 0.0, 1.52, 2.0, 4.5] {
        for r in [0.30, 2.05, 4.05] {
            for z in [0.0, 2.0, 7.0] {
                let mean = params.gamma(pi, r, z);
                let b = |f: &dyn Fn(f64) -> f64| apply_b(f, pi, r, z, &params, &quad);
                worst[0] = worst[0].max((b(&|_| 1.0) - 1.0).abs());
                worst[1] = worst[1].max((b(&|x| x) - mean).abs() / mean.abs().max(1.0));
                worst[2] = worst[2].max((b(&|x| x * x) - (mean * mean + v * v)).abs());
                worst[3] = worst[3].max((b(&sinusoid) - trapezoid_expectation(sinusoid, mean, v)).abs());
            }
        }
    }
    let passed = worst[0] <= MACHINE_TOL
        && worst[1] <= MACHINE_TOL
        && worst[2] <= SECOND_MOMENT_TOL
        && worst[3] <= SINUSOID_TOL;
    Verdict::new(
        passed,
        format!(
            "K=20: |B1-1| {:.1e}, |Bpi-gamma| {:.1e} (limit {MACHINE_TOL:.1e}); |Bpi^2-(gamma^2+v^2)| {:.1e} (limit {SECOND_MOMENT_TOL:e}); sinusoid vs trapezoid {:.1e} (limit {SINUSOID_TOL:e})",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

/// `E[f(mean + v Z)]` by the trapezoid rule on `[−12, 12]` standard deviations.
fn trapezoid_expectation(f: impl Fn(f64) -> f64, mean: f64, v: f64) -> f64 {
    let (a, b) = (-12.0, 12.0);
    let h = (b - a) / (TRAPEZOID_POINTS - 1) as f64;
    let density = |s: f64| (-0.5 * s * s).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let g = |s: f64| f(mean + v * s) * density(s);
    let interior: f64 = (1..TRAPEZOID_POINTS - 1).map(|i| g(a + i as f64 * h)).sum();
    h * (interior + 0.5 * (g(a) + g(b)))
}

fn jump_law() -> Verdict {
    let params = reference();
    let spec = &params.jumps;
    let m = spec.m as i32;
    let mut worst_sd: f64 = 0.0;
    let mut impossible_hits = 0u64;
    for (i, (pi, r)) in [(1.52, 2.05), (1.52, 0.30), (1.52, 4.05), (3.0, 1.05), (0.0, 3.80)].into_iter().enumerate() {
        let q = params.q_probs(pi, r).expect("q_probs");
        let counts = thinned_jump_counts(&params, pi, r, JUMP_ARRIVALS, 7 + i as u64).expect("counts");
        let n = JUMP_ARRIVALS as f64;
        for k in -m..=m {
            let idx = (k + m) as usize;
            let p = q[idx];
            let c = counts[idx] as f64;
            if p == 0.0 {
                impossible_hits += counts[idx];
                continue;
            }
            let sd = (n * p * (1.0 - p)).sqrt();
            worst_sd = worst_sd.max((c - n * p).abs() / sd);
        }
    }
    let mut worst_sum: f64 = 0.0;
    for a in 0..100 {
        let pi = -3.0 + 10.0 * a as f64 / 99.0;
        for b in 0..100 {
            let r = spec.r_lo + (b as f64 + 0.5) * (spec.r_hi - spec.r_lo) / 100.0;
            let q = params.q_probs(pi, r).expect("q_probs");
            worst_sum = worst_sum.max((q.iter().sum::<f64>() - 1.0).abs());
        }
    }
    let passed = worst_sd <= JUMP_SDS && impossible_hits == 0 && worst_sum <= Q_SUM_TOL;
    Verdict::new(
        passed,
        format!(
            "worst frequency deviation {worst_sd:.2} sd (limit {JUMP_SDS}), {impossible_hits} inadmissible jumps; max |sum q - 1| on 100x100 {worst_sum:.1e} (limit {Q_SUM_TOL:e})"
        ),
    )
}

/// Every grid the other criteria solve on, with the parameters used there.
fn acceptance_grids() -> Vec<(String, Grid, ModelParams)> {
    let table = reference();
    let mut grids = Vec::new();
    for n in LADDER {
        for f in [1, 2, 4] {
            let g = Grid::for_model(&table, n * f, n * f, 7.0);
            grids.push((format!("{0}x{0}", n * f), g, table.clone()));
        }
    }
    let mut cross = Grid::for_model(&table, 100, 100, 7.0);
    cross.h_count = full_levels(&table.jumps);
    grids.push(("100x100 H=17".into(), cross, table.clone()));
    let cir = config("cir.toml").params().expect("cir config");
    grids.push(("cir 150x150".into(), Grid::for_model(&cir, 150, 150, 7.0), cir));
    grids.push(("shortcut 50x50".into(), Grid::for_model(&table, 50, 50, 7.0), table));
    grids.sort_by_key(|(_, g, _)| (g.n_steps, g.h_count));
    grids.dedup_by_key(|(_, g, p)| (g.n_steps, g.j_count, g.h_count, p.short_rate.b1.to_bits()));
    grids
}

fn scheme_invariants() -> Verdict {
    let mut worst_margin = (String::new(), f64::INFINITY);
    let mut worst_residual: f64 = 0.0;
    let mut zero_ok = true;
    let mut worst_spread: f64 = 0.0;
    let mut errors = Vec::new();
    let grids = acceptance_grids();
    for (label, grid, params) in &grids {
        let coeffs = Coefficients::build(grid, params);
        let (_, _, margin) = coeffs.min_dominance_margin();
        if margin < worst_margin.1 {
            worst_margin = (label.clone(), margin);
        }
        let solver = match IntervalSolver::new(grid, params) {
            Ok(s) => s,
            Err(e) => {
                errors.push(format!("{label}: {e}"));
                continue;
            }
        };
        let jw = JumpWeights::build(grid, params, 1.52);

        let datum = Lattice::from_fn(grid, &params.jumps, 1.52, |r, z| (-z / 3.0).exp() * (1.0 + r / 4.0));
        let rhs = build_rhs(&datum, solver.coefficients(), &jw, grid);
        for h in 1..grid.h_count {
            let factor = solver.matrix(h).factorize().expect("factorize");
            let b = &rhs[h - 1];
            let x = factor.solve(b);
            let scale = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            worst_residual = worst_residual.max(factor.residual(&x, b) / scale);
        }

        match solver.solve_interval(&Lattice::zeros(grid, 1.52), &jw) {
            Ok(out) => zero_ok &= out.values().iter().all(|&v| v == 0.0),
            Err(e) => errors.push(format!("{label} zero datum: {e}")),
        }

        let mut flat = params.clone();
        flat.jumps.lambda = Intensity::Constant(0.0);
        flat.short_rate.b0 = 2.0;
        flat.short_rate.b1 = 0.0;
        let spread = IntervalSolver::new(grid, &flat).and_then(|s| {
            let terminal = Lattice::from_fn(grid, &flat.jumps, 1.52, |_, z| (-z / 2.0).exp());
            s.solve_interval(&terminal, &JumpWeights::build(grid, &flat, 1.52))
        });
        match spread {
            Ok(out) => {
                let first = out.row(1).to_vec();
                for h in 2..=out.levels() {
                    for (a, b) in out.row(h).iter().zip(&first) {
                        worst_spread = worst_spread.max((a - b).abs());
                    }
                }
            }
            Err(e) => errors.push(format!("{label} h-constant datum: {e}")),
        }
    }
    let passed = errors.is_empty()
        && worst_margin.1 > 0.0
        && worst_residual <= RESIDUAL_TOL
        && zero_ok
        && worst_spread <= H_CONSTANT_TOL;
    let mut detail = format!(
        "{} grids: min dominance margin {:.3e} ({}); max relative residual {worst_residual:.1e} (limit {RESIDUAL_TOL:e}); zero datum stays zero: {zero_ok}; h-constant spread {worst_spread:.1e} (limit {H_CONSTANT_TOL:e})",
        grids.len(),
        worst_margin.1,
        worst_margin.0
    );
    if !errors.is_empty() {
        detail.push_str(&format!("; errors: {}", errors.join("; ")));
    }
    Verdict::new(passed, detail)
}

struct RateOnly;

impl Payoff for RateOnly {
    fn value(&self, _pi: f64, r: f64, z: f64) -> f64 {
        (-z / 4.0).exp() * (1.0 + r / 10.0)
    }

    fn depends_on_pi(&self) -> bool {
        false
    }
}

fn shortcut_equivalence() -> Verdict {
    let params = reference();
    let grid = Grid::for_model(&params, 50, 50, 7.0);
    let pi_grid = InflationGrid::covering(&params, 7.0, 9).expect("pi grid");
    let quad = Quadrature::gauss_hermite(20).expect("quadrature");
    let mut worst: f64 = 0.0;
    for (name, payoff) in [("bond", &Constant(1.0) as &dyn Payoff), ("rate payoff", &RateOnly)] {
        let chained = match chain(payoff, &grid, &pi_grid, &params, &quad, |_| {}) {
            Ok(s) => s,
            Err(e) => return Verdict::new(false, format!("{name}: {e}")),
        };
        let direct = match single_horizon(payoff, &grid, &params) {
            Ok(l) => l,
            Err(e) => return Verdict::new(false, format!("{name}: {e}")),
        };
        for lattice in &chained.lattices {
            for (a, b) in lattice.values().iter().zip(direct.values()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Verdict::new(
        worst <= SHORTCUT_TOL,
        format!(
            "M={} chained vs single horizon, every pi node: max diff {worst:.1e} (limit {SHORTCUT_TOL:e})",
            params.inflation.intervals
        ),
    )
}

fn positivity_and_confinement() -> Verdict {
    let params = reference();
    let spec = &params.jumps;
    let start = InitialState {
        pi: 1.52,
        r: 2.05,
        z: 2.0,
    };
    let mut outside = 0u64;
    let mut negative = 0u64;
    let mut jumps = 0usize;
    for i in 0..CONFINEMENT_PATHS {
        let mut rng = path_rng(2024, i);
        let path = match simulate_path(&params, start, params.maturity(), 1e-3, &mut rng) {
            Ok(p) => p,
            Err(e) => return Verdict::new(false, format!("path {i}: {e}")),
        };
        jumps += path.jump_times.len();
        outside += path.ecb_levels.iter().filter(|&&r| !(r > spec.r_lo && r < spec.r_hi)).count() as u64;
        negative += path.short_rate_samples.iter().filter(|&&z| !(z >= 0.0)).count() as u64;
    }
    Verdict::new(
        outside == 0 && negative == 0,
        format!(
            "{CONFINEMENT_PATHS} paths, {jumps} accepted jumps: {outside} ECB levels outside ({}, {}), {negative} negative short-rate samples",
            spec.r_lo, spec.r_hi
        ),
    )
}
