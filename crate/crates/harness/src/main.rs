use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use ecb_pricing_harness::config::parse_ladder;
use ecb_pricing_harness::{run_with_log, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "ecb-pricing", version, about = "Inflation-linked pricing under ECB rate jumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Suppress progress lines on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Time-0 price surface by the PDE recursion.
    PricePde(Common),
    /// Monte Carlo price at the configured initial state.
    PriceMc {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Relative errors and observed orders along a refinement ladder.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated rungs, `30,50` or `30x60,50x100`.
        #[arg(long)]
        ladder: Option<String>,
    },
    /// PDE against Monte Carlo at the configured probe nodes.
    CrossCheck(Common),
    /// PDE bond price against the closed-form CIR bond.
    CirOracle(Common),
}

fn load(common: &Common, mode: Mode) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::from_path(&common.config)?;
    cfg.mode = mode;
    if let Some(out) = &common.output {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let (cfg, quiet) = match &cli.command {
        Command::PricePde(c) => (load(c, Mode::PricePde)?, c.quiet),
        Command::PriceMc { common, paths, seed, dt } => {
            let mut cfg = load(common, Mode::PriceMc)?;
            if let Some(p) = paths {
                cfg.mc.paths = *p;
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(d) = dt {
                cfg.mc.dt = *d;
            }
            (cfg, common.quiet)
        }
        Command::Convergence { common, ladder } => {
            let mut cfg = load(common, Mode::Convergence)?;
            if let Some(l) = ladder {
                cfg.set_ladder(parse_ladder(l)?)?;
            }
            (cfg, common.quiet)
        }
        Command::CrossCheck(c) => (load(c, Mode::CrossCheck)?, c.quiet),
        Command::CirOracle(c) => (load(c, Mode::CirOracle)?, c.quiet),
    };
    let outcome = run_with_log(&cfg, |line| {
        if !quiet {
            eprintln!("{line}");
        }
    })
    .with_context(|| format!("{} run failed", cfg.mode))?;
    print!("{}", outcome.summary);
    if cfg.mode == Mode::PriceMc {
        if let Some(path) = outcome.files.iter().find(|p| p.ends_with("mc.csv")) {
            print!("{}", std::fs::read_to_string(path)?);
        }
    }
    Ok(outcome.passed)
}
