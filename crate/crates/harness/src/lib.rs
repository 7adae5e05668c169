//! Configuration, experiment drivers and error analytics for the
//! `ecb-pricing` command-line tool.

pub mod analytics;
pub mod config;
pub mod oracle;
pub mod run;

pub use config::{Mode, RunConfig, Rung};
pub use run::{run, run_with_log, Outcome};

use ecb_pricing::PricingError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("model validation failed:\n{0}")]
    Validation(String),
    #[error(transparent)]
    Pricing(#[from] PricingError),
}
