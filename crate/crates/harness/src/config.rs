//! Run configuration read from TOML.
//!
//! ```toml
//! mode = "price-pde"
//! output = "out/reference"
//! maturity = 1.0
//!
//! [model.inflation]
//! alpha = 0.8
//! # ...
//!
//! [grid]
//! n_steps = 100
//! j_count = 100
//!
//! [payoff]
//! kind = "iis"
//! notional = 1.0
//! pi0 = 1.0
//! ```

use std::fmt;
use std::path::PathBuf;

use ecb_pricing::model::ModelConfig;
use ecb_pricing::pde::{Grid, DEFAULT_Z_MAX};
use ecb_pricing::payoff::{Constant, InflationLeg, Payoff};
use ecb_pricing::recursion::{InflationGrid, DEFAULT_PI_POINTS, DEFAULT_QUAD_NODES};
use ecb_pricing::simulator::InitialState;
use ecb_pricing::{ModelParams, PricingError};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PricePde,
    PriceMc,
    Convergence,
    CrossCheck,
    CirOracle,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PricePde => "price-pde",
            Mode::PriceMc => "price-mc",
            Mode::Convergence => "convergence",
            Mode::CrossCheck => "cross-check",
            Mode::CirOracle => "cir-oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_steps: usize,
    pub j_count: usize,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    /// Defaults to `⌊(r_hi − r_lo)/δ⌋`.
    #[serde(default)]
    pub h_count: Option<usize>,
}

fn default_z_max() -> f64 {
    DEFAULT_Z_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationGridConfig {
    #[serde(default)]
    pub pi_min: Option<f64>,
    #[serde(default)]
    pub pi_max: Option<f64>,
    #[serde(default = "default_pi_points")]
    pub count: usize,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
}

fn default_pi_points() -> usize {
    DEFAULT_PI_POINTS
}

fn default_quad_nodes() -> usize {
    DEFAULT_QUAD_NODES
}

impl Default for InflationGridConfig {
    fn default() -> Self {
        Self {
            pi_min: None,
            pi_max: None,
            count: DEFAULT_PI_POINTS,
            quad_nodes: DEFAULT_QUAD_NODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PayoffConfig {
    Iis {
        #[serde(default = "one")]
        notional: f64,
        pi0: f64,
    },
    Bond,
    Constant {
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Payoff built from a [`PayoffConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinPayoff {
    Iis(InflationLeg),
    Constant(Constant),
}

impl Payoff for BuiltinPayoff {
    fn value(&self, pi: f64, r: f64, z: f64) -> f64 {
        match self {
            BuiltinPayoff::Iis(p) => p.value(pi, r, z),
            BuiltinPayoff::Constant(p) => p.value(pi, r, z),
        }
    }

    fn depends_on_pi(&self) -> bool {
        matches!(self, BuiltinPayoff::Iis(_))
    }
}

impl PayoffConfig {
    pub fn build(&self) -> BuiltinPayoff {
        match *self {
            PayoffConfig::Iis { notional, pi0 } => BuiltinPayoff::Iis(InflationLeg { notional, pi0 }),
            PayoffConfig::Bond => BuiltinPayoff::Constant(Constant(1.0)),
            PayoffConfig::Constant { value } => BuiltinPayoff::Constant(Constant(value)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub pi: f64,
    pub r: f64,
    pub z: f64,
}

impl From<InitialConfig> for InitialState {
    fn from(c: InitialConfig) -> Self {
        InitialState {
            pi: c.pi,
            r: c.r,
            z: c.z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_paths() -> usize {
    100_000
}

fn default_dt() -> f64 {
    1e-3
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: default_paths(),
            dt: default_dt(),
        }
    }
}

/// A ladder rung, `30` for `30×30` or `[30, 60]` for `N×J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rung {
    Square(usize),
    Pair([usize; 2]),
}

impl Rung {
    pub fn n_steps(&self) -> usize {
        match *self {
            Rung::Square(n) => n,
            Rung::Pair([n, _]) => n,
        }
    }

    pub fn j_count(&self) -> usize {
        match *self {
            Rung::Square(n) => n,
            Rung::Pair([_, j]) => j,
        }
    }

    pub fn label(&self) -> String {
        format!("{}x{}", self.n_steps(), self.j_count())
    }
}

/// `(r, z)` nodes probed by the cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheckConfig {
    pub probes: Vec<[f64; 2]>,
    #[serde(default = "default_sigmas")]
    pub max_std_errors: f64,
}

fn default_sigmas() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the model's `M` with `T/Θ`.
    #[serde(default)]
    pub maturity: Option<f64>,
    pub model: ModelConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub inflation_grid: InflationGridConfig,
    pub payoff: PayoffConfig,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub ladder: Vec<Rung>,
    #[serde(default)]
    pub cross_check: Option<CrossCheckConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        cfg.check_ladder()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn check_ladder(&self) -> Result<(), HarnessError> {
        let increasing = self.ladder.windows(2).all(|w| {
            w[1].n_steps() > w[0].n_steps() && w[1].j_count() > w[0].j_count()
        });
        if !increasing {
            return Err(PricingError::Config("ladder must be strictly increasing".into()).into());
        }
        if self.ladder.iter().any(|r| r.n_steps() == 0 || r.j_count() < 3) {
            return Err(PricingError::Config("ladder rungs need N >= 1 and J >= 3".into()).into());
        }
        Ok(())
    }

    /// Replaces the ladder, e.g. from the command line.
    pub fn set_ladder(&mut self, ladder: Vec<Rung>) -> Result<(), HarnessError> {
        self.ladder = ladder;
        self.check_ladder()
    }

    /// Model parameters with `M` taken from `maturity` when given.
    pub fn params(&self) -> Result<ModelParams, HarnessError> {
        let params = self.model.to_params()?;
        match self.maturity {
            Some(t) => {
                let m = params.intervals_for(t)?;
                Ok(params.with_intervals(m))
            }
            None => Ok(params),
        }
    }

    pub fn grid(&self, params: &ModelParams) -> Result<Grid, HarnessError> {
        let mut grid = Grid::for_model(params, self.grid.n_steps, self.grid.j_count, self.grid.z_max);
        if let Some(h) = self.grid.h_count {
            grid.h_count = h;
        }
        grid.validate(params)?;
        Ok(grid)
    }

    pub fn pi_grid(&self, params: &ModelParams) -> Result<InflationGrid, HarnessError> {
        let ig = &self.inflation_grid;
        let cover = InflationGrid::covering(params, self.grid.z_max, ig.count)?;
        Ok(InflationGrid::new(
            ig.pi_min.unwrap_or(cover.pi_min),
            ig.pi_max.unwrap_or(cover.pi_max),
            ig.count,
        )?)
    }

    /// Starting point for the simulator and the reported PDE price.
    pub fn initial_state(&self) -> Result<InitialState, HarnessError> {
        self.initial
            .map(InitialState::from)
            .ok_or_else(|| PricingError::Config("[initial] section is required for this mode".into()).into())
    }
}

/// Parses `30,50,70` or `30x60,50x100`.
pub fn parse_ladder(text: &str) -> Result<Vec<Rung>, HarnessError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let bad = || HarnessError::Parse(format!("bad ladder rung '{s}'"));
            match s.split_once(['x', 'X']) {
                Some((n, j)) => Ok(Rung::Pair([
                    n.trim().parse().map_err(|_| bad())?,
                    j.trim().parse().map_err(|_| bad())?,
                ])),
                None => Ok(Rung::Square(s.parse().map_err(|_| bad())?)),
            }
        })
        .collect()
}
