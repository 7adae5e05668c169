use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("rate {r} outside the open interval ({lo}, {hi})")]
    Domain { r: f64, lo: f64, hi: f64 },

    /// The time-step matrix lost strict diagonal dominance at row `j` of
    /// ECB level `h`; the grid must be refined.
    #[error("diagonal dominance violated at (h={h}, j={j}): margin {margin:e}; refine the grid")]
    GridRefinement { h: usize, j: usize, margin: f64 },

    #[error("numerical failure in {module} at {location}: {detail}")]
    Numerical {
        module: &'static str,
        location: String,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, PricingError>;
