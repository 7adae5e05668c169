use std::fmt;

use super::{JumpLaw, ModelParams, Strictness};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub severity: Severity,
    /// Short machine-readable name of the violated condition.
    pub check: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag} [{}]: {}", self.check, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    pub fn find(&self, check: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.check == check)
    }

    fn error(&mut self, check: &'static str, message: String) {
        self.violations.push(Violation {
            severity: Severity::Error,
            check,
            message,
        });
    }

    fn soft(&mut self, strictness: Strictness, check: &'static str, message: String) {
        let severity = match strictness {
            Strictness::Strict => Severity::Error,
            Strictness::Lenient => Severity::Warning,
        };
        self.violations.push(Violation {
            severity,
            check,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "all checks passed");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

const SCAN: usize = 100;

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

pub(super) fn validate(params: &ModelParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let strict = params.strictness;
    let inf = &params.inflation;
    let jumps = &params.jumps;
    let sr = &params.short_rate;

    if !(inf.v > 0.0) {
        report.error("v_positive", format!("v = {} must be positive", inf.v));
    }
    if !(inf.theta > 0.0) {
        report.error("theta_positive", format!("theta = {} must be positive", inf.theta));
    }
    if inf.intervals < 1 {
        report.error("intervals_positive", "M must be at least 1".into());
    }
    let spread = inf.alpha - inf.k_pi;
    if !(spread > 0.0 && spread < 1.0) {
        report.soft(
            strict,
            "inflation_reversion",
            format!("alpha - k_pi = {spread} outside (0,1)"),
        );
    }

    if !(jumps.r_lo < jumps.r_hi) {
        report.error(
            "rate_bounds",
            format!("r_lo = {} must be below r_hi = {}", jumps.r_lo, jumps.r_hi),
        );
        return report;
    }
    if !(jumps.delta > 0.0) {
        report.error("delta_positive", format!("delta = {} must be positive", jumps.delta));
        return report;
    }
    if jumps.m < 1 {
        report.error("m_positive", "m must be at least 1".into());
        return report;
    }
    if !(jumps.lambda_bar > 0.0) || !jumps.lambda_bar.is_finite() {
        report.error(
            "lambda_bar_positive",
            format!("lambda_bar = {} must be positive and finite", jumps.lambda_bar),
        );
        return report;
    }
    if let JumpLaw::Weights(w) = &jumps.p {
        if w.len() != 2 * jumps.m as usize || w.iter().any(|x| !(*x >= 0.0)) {
            report.error(
                "jump_weights",
                format!(
                    "jump weights need {} nonnegative entries, got {:?}",
                    2 * jumps.m,
                    w
                ),
            );
            return report;
        }
    }

    // Scan (π, r) on a grid strictly inside the rate bounds.
    let pi_lo = inf.pi_star - 10.0;
    let pi_hi = inf.pi_star + 10.0;
    let width = jumps.r_hi - jumps.r_lo;
    let r_grid: Vec<f64> = (1..=SCAN)
        .map(|i| jumps.r_lo + width * i as f64 / (SCAN + 1) as f64)
        .collect();
    let m = jumps.m as i32;
    let mut sup_lambda = f64::NEG_INFINITY;
    let mut worst_sum: Option<(f64, f64, f64)> = None;
    let mut leak: Option<(f64, f64, i32, f64)> = None;
    let mut negative: Option<(f64, f64, i32, f64)> = None;
    for pi in linspace(pi_lo, pi_hi, SCAN) {
        for &r in &r_grid {
            let lam = jumps.intensity(pi, r);
            if !(lam >= 0.0) && negative.is_none() {
                negative = Some((pi, r, 0, lam));
            }
            sup_lambda = sup_lambda.max(lam);
            let mut total = 0.0;
            for k in (-m..=m).filter(|&k| k != 0) {
                let pk = jumps.prob(pi, r, k);
                if !(pk >= 0.0) && negative.is_none() {
                    negative = Some((pi, r, k, pk));
                }
                if !jumps.admissible(r, k) && pk != 0.0 && leak.is_none() {
                    leak = Some((pi, r, k, pk));
                }
                total += pk;
            }
            let dev = (total - 1.0).abs();
            if dev > 1e-12 && worst_sum.is_none_or(|(_, _, d)| dev > d) {
                worst_sum = Some((pi, r, dev));
            }
        }
    }
    if let Some((pi, r, k, val)) = negative {
        report.error(
            "nonnegative_law",
            format!("negative intensity or probability {val} at (pi={pi}, r={r}, k={k})"),
        );
    }
    if let Some((pi, r, k, pk)) = leak {
        report.error(
            "jump_confinement",
            format!("p(pi={pi}, r={r}, k={k}) = {pk} but r + k*delta leaves the rate bounds"),
        );
    }
    if let Some((pi, r, dev)) = worst_sum {
        report.error(
            "jump_normalisation",
            format!("jump probabilities at (pi={pi}, r={r}) miss 1 by {dev:e}"),
        );
    }
    if sup_lambda > jumps.lambda_bar {
        report.error(
            "lambda_bar_dominates",
            format!(
                "lambda_bar = {} below sampled sup lambda = {sup_lambda}",
                jumps.lambda_bar
            ),
        );
    }

    if !(sr.k_sh > 0.0) {
        report.error("k_sh_positive", format!("k_sh = {} must be positive", sr.k_sh));
    }
    let inf_b = sr.inf_drift(jumps.r_lo, jumps.r_hi);
    if !(inf_b > 0.0) {
        report.error(
            "drift_positive",
            format!("inf b(r) = {inf_b} over the rate bounds must be positive"),
        );
    }

    // σ̄² must be nonnegative and finite; sample a geometric grid of q.
    let q_samples: Vec<f64> = std::iter::once(0.0)
        .chain((-6..=16).map(|e| 10f64.powf(e as f64 / 2.0)))
        .collect();
    if let Some(&q) = q_samples
        .iter()
        .find(|&&q| !(sr.sigma_bar_sq(q) >= 0.0) || !sr.sigma_bar_sq(q).is_finite())
    {
        report.error(
            "sigma_bar_nonnegative",
            format!("sigma_bar^2({q}) = {} is not a nonnegative number", sr.sigma_bar_sq(q)),
        );
    } else {
        let ratio = |q: f64| sr.sigma_bar_sq(q) / (1.0 + q.sqrt());
        let body = q_samples
            .iter()
            .filter(|&&q| q <= 1e4)
            .map(|&q| ratio(q))
            .fold(0.0f64, f64::max);
        let tail = ratio(1e8);
        if tail > 10.0 * body.max(f64::MIN_POSITIVE) {
            report.soft(
                Strictness::Lenient,
                "sigma_bar_growth",
                format!(
                    "sigma_bar^2(q)/(1+sqrt q) grows from {body} to {tail} at q=1e8; \
                     sublinear growth looks violated"
                ),
            );
        }

        let floor = jumps.r_lo.min(0.0);
        let required = 0.5 * sr.sigma_bar_sq(jumps.r_hi - floor);
        let available = sr.k_sh * inf_b;
        if !(available >= required) {
            report.soft(
                strict,
                "feller",
                format!(
                    "k_sh * inf b = {available} below sigma_bar^2(r_hi - min(r_lo,0))/2 = {required}"
                ),
            );
        }
    }

    report
}
