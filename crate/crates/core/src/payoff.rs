//! Terminal payoffs `Φ(π, r, z)`.

/// A European payoff on `(Π(T), R(T), R^sh(T))`, rates in percent.
pub trait Payoff: Sync {
    fn value(&self, pi: f64, r: f64, z: f64) -> f64;

    /// Whether the payoff varies with inflation. Closures are assumed to.
    fn depends_on_pi(&self) -> bool {
        true
    }
}

impl<F> Payoff for F
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    fn value(&self, pi: f64, r: f64, z: f64) -> f64 {
        self(pi, r, z)
    }
}

/// Inflation leg of an inflation-indexed swap, `N (π/π₀ − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflationLeg {
    pub notional: f64,
    pub pi0: f64,
}

impl Default for InflationLeg {
    fn default() -> Self {
        Self {
            notional: 1.0,
            pi0: 1.0,
        }
    }
}

impl Payoff for InflationLeg {
    fn value(&self, pi: f64, _r: f64, _z: f64) -> f64 {
        self.notional * (pi / self.pi0 - 1.0)
    }
}

/// Constant payoff; `Constant(1.0)` is the zero-coupon bond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Payoff for Constant {
    fn value(&self, _pi: f64, _r: f64, _z: f64) -> f64 {
        self.0
    }

    fn depends_on_pi(&self) -> bool {
        false
    }
}
