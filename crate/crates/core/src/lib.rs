//! Pricing engine for European claims on a three-factor model of inflation,
//! the central-bank policy rate (a pure jump process on a `δ` lattice) and a
//! CIR-type short rate.
//!
//! * [`model`]: parameters, validation and the closed-form maps.
//! * [`simulator`]: path construction and Monte Carlo pricing.
//! * [`pde`]: the semi-implicit finite-difference scheme for one
//!   observation interval.
//! * [`recursion`]: chaining of interval solves through the Gaussian
//!   inflation-update operator.

pub mod error;
pub mod model;
pub mod payoff;
pub mod pde;
pub mod recursion;
pub mod simulator;

pub use error::{PricingError, Result};
pub use model::{ModelParams, Strictness};
