//! Text configuration for [`ModelParams`]. Field names follow the model
//! symbols (`alpha`, `k_pi`, `pi_star`, ..., `sigma_bar`).

use serde::{Deserialize, Serialize};

use super::{
    DiscountUnits, InflationParams, Intensity, JumpLaw, JumpSpec, ModelParams, ShortRateParams,
    Strictness, Volatility,
};
use crate::error::{PricingError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub strictness: Strictness,
    /// `"percent"` (default) or `"decimal"`.
    #[serde(default)]
    pub discount_units: DiscountUnits,
    pub inflation: InflationConfig,
    pub jumps: JumpConfig,
    pub short_rate: ShortRateConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationConfig {
    pub alpha: f64,
    pub k_pi: f64,
    pub pi_star: f64,
    pub beta: f64,
    pub v: f64,
    pub theta: f64,
    #[serde(rename = "M")]
    pub m_intervals: usize,
}

/// `lambda = 10.0` for a constant intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntensityConfig {
    Constant(f64),
}

/// `p = "uniform"` or `p = { weights = [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JumpLawConfig {
    Named(String),
    Weights { weights: Vec<f64> },
}

/// `sigma_bar = 0.23` or `sigma_bar = { saturating = 0.5 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VolatilityConfig {
    Constant(f64),
    Saturating { saturating: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub lambda: IntensityConfig,
    #[serde(default = "uniform_law")]
    pub p: JumpLawConfig,
    pub lambda_bar: f64,
    pub delta: f64,
    pub m: u32,
    pub r_lo: f64,
    pub r_hi: f64,
}

fn uniform_law() -> JumpLawConfig {
    JumpLawConfig::Named("uniform".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShortRateConfig {
    pub k_sh: f64,
    pub b0: f64,
    pub b1: f64,
    pub sigma_bar: VolatilityConfig,
}

impl ModelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PricingError::Config(e.to_string()))
    }

    pub fn to_params(&self) -> Result<ModelParams> {
        let p = match &self.jumps.p {
            JumpLawConfig::Named(name) if name == "uniform" => JumpLaw::Uniform,
            JumpLawConfig::Named(other) => {
                return Err(PricingError::Config(format!("unknown jump law '{other}'")))
            }
            JumpLawConfig::Weights { weights } => JumpLaw::Weights(weights.clone()),
        };
        let lambda = match self.jumps.lambda {
            IntensityConfig::Constant(l) => Intensity::Constant(l),
        };
        let sigma_bar = match self.short_rate.sigma_bar {
            VolatilityConfig::Constant(s) => Volatility::Constant(s),
            VolatilityConfig::Saturating { saturating } => Volatility::Saturating {
                sigma0: saturating,
            },
        };
        let i = &self.inflation;
        Ok(ModelParams {
            inflation: InflationParams {
                alpha: i.alpha,
                k_pi: i.k_pi,
                pi_star: i.pi_star,
                beta: i.beta,
                v: i.v,
                theta: i.theta,
                intervals: i.m_intervals,
            },
            jumps: JumpSpec {
                lambda,
                p,
                lambda_bar: self.jumps.lambda_bar,
                delta: self.jumps.delta,
                m: self.jumps.m,
                r_lo: self.jumps.r_lo,
                r_hi: self.jumps.r_hi,
            },
            short_rate: ShortRateParams {
                k_sh: self.short_rate.k_sh,
                b0: self.short_rate.b0,
                b1: self.short_rate.b1,
                sigma_bar,
            },
            strictness: self.strictness,
            discount_units: self.discount_units,
        })
    }
}

impl ModelParams {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        ModelConfig::from_toml_str(text)?.to_params()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"
        [inflation]
        alpha = 0.8
        k_pi = 3.0
        pi_star = 2.0
        beta = 1.2
        v = 0.1
        theta = 0.25
        M = 4

        [jumps]
        lambda = 10.0
        p = "uniform"
        lambda_bar = 10.0
        delta = 0.25
        m = 4
        r_lo = 0.05
        r_hi = 4.25

        [short_rate]
        k_sh = 2.0
        b0 = 0.0
        b1 = 1.0
        sigma_bar = 0.23
    "#;

    #[test]
    fn parses_reference_configuration() {
        let p = ModelParams::from_toml_str(REFERENCE).unwrap();
        let r = ModelParams::reference();
        assert_eq!(p.inflation, r.inflation);
        assert_eq!(p.strictness, Strictness::Lenient);
        assert_eq!(p.jumps.m, 4);
        assert_eq!(p.jumps.lambda.eval(0.0, 1.0), 10.0);
        assert!(matches!(p.jumps.p, JumpLaw::Uniform));
        assert_eq!(p.sigma_bar_sq(1.0), r.sigma_bar_sq(1.0));
    }

    #[test]
    fn parses_alternative_handles() {
        let text = REFERENCE
            .replace("p = \"uniform\"", "p = { weights = [1,1,1,1,2,2,2,2] }")
            .replace("sigma_bar = 0.23", "sigma_bar = { saturating = 0.5 }");
        let p = ModelParams::from_toml_str(&text).unwrap();
        assert!(matches!(p.jumps.p, JumpLaw::Weights(ref w) if w.len() == 8));
        assert!(matches!(p.short_rate.sigma_bar, Volatility::Saturating { sigma0 } if sigma0 == 0.5));
    }

    #[test]
    fn rejects_unknown_law_and_fields() {
        let bad = REFERENCE.replace("\"uniform\"", "\"geometric\"");
        assert!(ModelParams::from_toml_str(&bad).is_err());
        let extra = REFERENCE.replace("m = 4", "m = 4\nmystery = 1");
        assert!(ModelParams::from_toml_str(&extra).is_err());
    }
}
