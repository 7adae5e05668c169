//! Model parameters and the closed-form maps shared by the simulator and the
//! PDE solver.
//!
//! All rates (inflation, ECB rate, short rate, jump unit, bounds, drift target)
//! are stored in percent. The only conversion happens where the short rate is
//! used as a discount rate, see [`DiscountUnits`].

mod config;
mod validate;

use std::fmt;
use std::sync::Arc;

pub use config::{IntensityConfig, JumpLawConfig, ModelConfig, VolatilityConfig};
pub use validate::{Severity, ValidationReport, Violation};

use crate::error::{PricingError, Result};

/// Percent to decimal factor.
pub const PERCENT: f64 = 100.0;

/// Parameters of the inflation update `Π(t_{i+1}) = γ(Π(t_i), R, R^sh) + ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct InflationParams {
    pub alpha: f64,
    pub k_pi: f64,
    pub pi_star: f64,
    pub beta: f64,
    /// Standard deviation of the Gaussian innovation (percent).
    pub v: f64,
    /// Spacing between observation dates, in years.
    pub theta: f64,
    /// Number of observation intervals to maturity.
    pub intervals: usize,
}

impl InflationParams {
    /// `γ(π, r, z) = απ + k^Π(π* − π) + β(r − z)`.
    #[inline]
    pub fn gamma(&self, pi: f64, r: f64, z: f64) -> f64 {
        self.alpha * pi + self.k_pi * (self.pi_star - pi) + self.beta * (r - z)
    }

    /// Level towards which `γ` pulls `π` for fixed `(r, z)`.
    pub fn reversion_target(&self, r: f64, z: f64) -> f64 {
        (self.k_pi * self.pi_star + self.beta * (r - z)) / (self.k_pi - self.alpha + 1.0)
    }
}

/// ECB-rate jump intensity `λ(π, r)` in jumps per year.
#[derive(Clone)]
pub enum Intensity {
    Constant(f64),
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Intensity {
    #[inline]
    pub fn eval(&self, pi: f64, r: f64) -> f64 {
        match self {
            Intensity::Constant(l) => *l,
            Intensity::Custom(f) => f(pi, r),
        }
    }

    pub fn depends_on_pi(&self) -> bool {
        matches!(self, Intensity::Custom(_))
    }
}

impl fmt::Debug for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Intensity::Constant(l) => write!(f, "Constant({l})"),
            Intensity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Law of the jump multiple `k` given that a jump occurs.
#[derive(Clone)]
pub enum JumpLaw {
    /// Uniform over the admissible nonzero multiples at the current rate.
    Uniform,
    /// Relative weights for `k = −m..−1, 1..m` (length `2m`), renormalised
    /// over the admissible multiples at the current rate.
    Weights(Vec<f64>),
    /// `p(π, r, k)` supplied directly. The handle is responsible for
    /// vanishing on inadmissible destinations and for summing to one.
    Custom(Arc<dyn Fn(f64, f64, i32) -> f64 + Send + Sync>),
}

impl fmt::Debug for JumpLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JumpLaw::Uniform => write!(f, "Uniform"),
            JumpLaw::Weights(w) => write!(f, "Weights({w:?})"),
            JumpLaw::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Jump specification of the ECB rate.
#[derive(Debug, Clone)]
pub struct JumpSpec {
    pub lambda: Intensity,
    pub p: JumpLaw,
    /// Dominating intensity, `λ̄ ≥ sup λ`.
    pub lambda_bar: f64,
    /// Jump unit (percent).
    pub delta: f64,
    /// Largest jump multiple.
    pub m: u32,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl JumpSpec {
    fn tol(&self) -> f64 {
        1e-9 * self.delta.abs().max(f64::MIN_POSITIVE)
    }

    /// Whether `r` lies strictly inside `(r_lo, r_hi)`.
    pub fn contains(&self, r: f64) -> bool {
        let eps = self.tol();
        r > self.r_lo + eps && r < self.r_hi - eps
    }

    /// Whether a jump of `k` units from `r` lands inside the rate bounds.
    pub fn admissible(&self, r: f64, k: i32) -> bool {
        k != 0 && self.contains(r + k as f64 * self.delta)
    }

    fn check_rate(&self, r: f64) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(PricingError::Domain {
                r,
                lo: self.r_lo,
                hi: self.r_hi,
            })
        }
    }

    #[inline]
    pub fn intensity(&self, pi: f64, r: f64) -> f64 {
        self.lambda.eval(pi, r)
    }

    /// `p(π, r, kδ)`; zero for `k = 0` and for inadmissible destinations.
    pub fn prob(&self, pi: f64, r: f64, k: i32) -> f64 {
        let m = self.m as i32;
        if k == 0 || k.abs() > m {
            return 0.0;
        }
        match &self.p {
            JumpLaw::Custom(f) => f(pi, r, k),
            JumpLaw::Uniform => {
                if !self.admissible(r, k) {
                    return 0.0;
                }
                let n = (-m..=m).filter(|&j| self.admissible(r, j)).count();
                1.0 / n as f64
            }
            JumpLaw::Weights(w) => {
                if !self.admissible(r, k) {
                    return 0.0;
                }
                let total: f64 = (-m..=m)
                    .filter(|&j| self.admissible(r, j))
                    .map(|j| w[weight_index(m, j)])
                    .sum();
                w[weight_index(m, k)] / total
            }
        }
    }

    /// Thinned jump probabilities `q(k)` for `k = −m..m`:
    /// `q(k) = p(k)λ/λ̄` for `k ≠ 0` and `q(0) = 1 − λ/λ̄`.
    pub fn q_probs(&self, pi: f64, r: f64) -> Result<Vec<f64>> {
        self.check_rate(r)?;
        let m = self.m as i32;
        let accept = self.intensity(pi, r) / self.lambda_bar;
        Ok((-m..=m)
            .map(|k| {
                if k == 0 {
                    1.0 - accept
                } else {
                    self.prob(pi, r, k) * accept
                }
            })
            .collect())
    }

    /// Jump multiple selected by the uniform draw `u`: the `k` whose
    /// cumulative `q` sub-interval contains `u`. The interval for `k = −m` is
    /// closed on the left, all others are left-open.
    pub fn jump_map(&self, pi: f64, r: f64, u: f64) -> Result<i32> {
        self.check_rate(r)?;
        let m = self.m as i32;
        let accept = self.intensity(pi, r) / self.lambda_bar;
        let mut lower = 0.0;
        let mut last_positive = 0;
        for k in -m..=m {
            let q = if k == 0 {
                1.0 - accept
            } else {
                self.prob(pi, r, k) * accept
            };
            if q <= 0.0 {
                continue;
            }
            let upper = lower + q;
            let hit = if k == -m {
                u >= lower && u <= upper
            } else {
                u > lower && u <= upper
            };
            if hit {
                return Ok(k);
            }
            lower = upper;
            last_positive = k;
        }
        // Rounding can leave the last cumulative sum a few ulps below one.
        if u > lower && u <= 1.0 && (1.0 - lower) < 1e-12 {
            return Ok(last_positive);
        }
        Ok(0)
    }

    /// Signed jump size `kδ` selected by `u`.
    pub fn jump_size(&self, pi: f64, r: f64, u: f64) -> Result<f64> {
        Ok(self.jump_map(pi, r, u)? as f64 * self.delta)
    }

    pub fn depends_on_pi(&self) -> bool {
        self.lambda.depends_on_pi() || matches!(self.p, JumpLaw::Custom(_))
    }
}

fn weight_index(m: i32, k: i32) -> usize {
    if k < 0 {
        (k + m) as usize
    } else {
        (k + m - 1) as usize
    }
}

/// Volatility function `σ̄` of the short rate, evaluated at the squared
/// spread `q = |R − R^sh|²`.
#[derive(Clone)]
pub enum Volatility {
    Constant(f64),
    /// `σ̄(q) = σ₀ q / (1 + q)`.
    Saturating { sigma0: f64 },
    /// Handle returning `σ̄²(q)` directly.
    CustomSquared(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Volatility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Volatility::Constant(s) => write!(f, "Constant({s})"),
            Volatility::Saturating { sigma0 } => write!(f, "Saturating {{ sigma0: {sigma0} }}"),
            Volatility::CustomSquared(_) => write!(f, "CustomSquared(..)"),
        }
    }
}

impl Volatility {
    #[inline]
    pub fn sigma_bar_sq(&self, q: f64) -> f64 {
        match self {
            Volatility::Constant(s) => s * s,
            Volatility::Saturating { sigma0 } => {
                let s = sigma0 * q / (1.0 + q);
                s * s
            }
            Volatility::CustomSquared(f) => f(q),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShortRateParams {
    pub k_sh: f64,
    pub b0: f64,
    pub b1: f64,
    pub sigma_bar: Volatility,
}

impl ShortRateParams {
    /// Drift target `b(r) = b0 + b1·r`.
    #[inline]
    pub fn drift_b(&self, r: f64) -> f64 {
        self.b0 + self.b1 * r
    }

    #[inline]
    pub fn sigma_bar_sq(&self, q: f64) -> f64 {
        self.sigma_bar.sigma_bar_sq(q)
    }

    /// `inf b(r)` over `(lo, hi)`; `b` is affine so the infimum sits at an end.
    pub fn inf_drift(&self, lo: f64, hi: f64) -> f64 {
        self.drift_b(lo).min(self.drift_b(hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Strict,
    #[default]
    Lenient,
}

/// How the short rate enters the discount factor `exp(−∫R^sh)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscountUnits {
    /// `R^sh` as stored: the discount term uses the percent figure itself.
    #[default]
    Percent,
    /// `R^sh/100`: a short rate of 2 discounts at 2% a year.
    Decimal,
}

impl DiscountUnits {
    /// Divisor turning a stored rate into the rate used for discounting.
    #[inline]
    pub fn divisor(self) -> f64 {
        match self {
            DiscountUnits::Decimal => PERCENT,
            DiscountUnits::Percent => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelParams {
    pub inflation: InflationParams,
    pub jumps: JumpSpec,
    pub short_rate: ShortRateParams,
    pub strictness: Strictness,
    pub discount_units: DiscountUnits,
}

impl ModelParams {
    /// Parameters of the reference experiment: constant `σ̄ = 0.23`,
    /// `λ = λ̄ = 10`, uniform jump law, rates in percent.
    pub fn reference() -> Self {
        Self {
            inflation: InflationParams {
                alpha: 0.8,
                k_pi: 3.0,
                pi_star: 2.0,
                beta: 1.2,
                v: 0.1,
                theta: 0.25,
                intervals: 4,
            },
            jumps: JumpSpec {
                lambda: Intensity::Constant(10.0),
                p: JumpLaw::Uniform,
                lambda_bar: 10.0,
                delta: 0.25,
                m: 4,
                r_lo: 0.05,
                r_hi: 4.25,
            },
            short_rate: ShortRateParams {
                k_sh: 2.0,
                b0: 0.0,
                b1: 1.0,
                sigma_bar: Volatility::Constant(0.23),
            },
            strictness: Strictness::Lenient,
            discount_units: DiscountUnits::Percent,
        }
    }

    /// Short rate `z` (percent) as used in the discount factor.
    #[inline]
    pub fn discount_rate(&self, z: f64) -> f64 {
        z / self.discount_units.divisor()
    }

    #[inline]
    pub fn gamma(&self, pi: f64, r: f64, z: f64) -> f64 {
        self.inflation.gamma(pi, r, z)
    }

    #[inline]
    pub fn drift_b(&self, r: f64) -> f64 {
        self.short_rate.drift_b(r)
    }

    #[inline]
    pub fn sigma_bar_sq(&self, q: f64) -> f64 {
        self.short_rate.sigma_bar_sq(q)
    }

    pub fn q_probs(&self, pi: f64, r: f64) -> Result<Vec<f64>> {
        self.jumps.q_probs(pi, r)
    }

    pub fn jump_map(&self, pi: f64, r: f64, u: f64) -> Result<i32> {
        self.jumps.jump_map(pi, r, u)
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self)
    }

    /// Copy with the maturity changed to `intervals` observation periods.
    pub fn with_intervals(&self, intervals: usize) -> Self {
        let mut p = self.clone();
        p.inflation.intervals = intervals;
        p
    }

    pub fn maturity(&self) -> f64 {
        self.inflation.theta * self.inflation.intervals as f64
    }

    /// Number of observation intervals covering `maturity`, which must be a
    /// whole multiple of the observation spacing.
    pub fn intervals_for(&self, maturity: f64) -> Result<usize> {
        let ratio = maturity / self.inflation.theta;
        let n = ratio.round();
        if !(maturity > 0.0) || n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(PricingError::Config(format!(
                "maturity {maturity} is not a positive multiple of theta = {}",
                self.inflation.theta
            )));
        }
        Ok(n as usize)
    }
}
