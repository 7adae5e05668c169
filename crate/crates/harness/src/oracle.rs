//! Closed-form zero-coupon bond of the CIR model, used as a test oracle.
//!
//! The short rate here is in percent with `dz = k(μ − z)dt + σ√z dW`. With
//! discount divisor `d` (100 for decimal discounting) the discounted rate
//! `y = z/d` is CIR with parameters `k`, `μ/d` and `σ/√d`.

use ecb_pricing::model::DiscountUnits;

/// `P(z, T) = A(T) exp(−B(T) z/100)`, discounting at the decimal rate.
pub fn cir_bond_oracle(k_sh: f64, mean_level: f64, sigma: f64, z: f64, maturity: f64) -> f64 {
    cir_bond_oracle_in(DiscountUnits::Decimal, k_sh, mean_level, sigma, z, maturity)
}

/// [`cir_bond_oracle`] under the given discount convention.
pub fn cir_bond_oracle_in(units: DiscountUnits, k_sh: f64, mean_level: f64, sigma: f64, z: f64, maturity: f64) -> f64 {
    let d = units.divisor();
    let theta = mean_level / d;
    let s = sigma / d.sqrt();
    let y = z / d;
    let t = maturity;
    if s == 0.0 {
        // Deterministic rate: exp(−∫y) along y(t) = θ + (y0 − θ)e^{−kt}.
        let b = if k_sh == 0.0 { t } else { -(-k_sh * t).exp_m1() / k_sh };
        return (-(theta * (t - b) + y * b)).exp();
    }
    let g = (k_sh * k_sh + 2.0 * s * s).sqrt();
    let e = (g * t).exp_m1();
    let denom = (g + k_sh) * e + 2.0 * g;
    let b = 2.0 * e / denom;
    let ln_a = 2.0 * k_sh * theta / (s * s) * ((2.0 * g).ln() + 0.5 * (k_sh + g) * t - denom.ln());
    (ln_a - b * y).exp()
}
