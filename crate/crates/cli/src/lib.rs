//! Command-line front end for the dispersion engine: TOML run configs,
//! CSV/JSON/SVG outputs and the `dispersion`, `converge` and `oracle`
//! subcommands.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{Overrides, RunConfig};

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "IPEPS_DISP_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ipeps-disp", version, about = "TFIM dispersion relations from iPEPS imaginary-time evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit Δ_k for every requested momentum.
    Dispersion(Common),
    /// Repeat one momentum over several bond dimensions and seeds.
    Converge(Common),
    /// Evaluate the series reference only.
    Oracle(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bond dimension, or a comma-separated ascending list for `converge`.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    /// Imaginary time step.
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Independent trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        cfg.apply(&Overrides {
            out: self.out.clone(),
            seed: self.seed,
            d: self.d.clone(),
            dtau: self.dtau,
            trials: self.trials,
            svg: self.svg,
        });
        Ok(cfg)
    }
}

/// Sizes the global rayon pool from [`WORKERS_ENV`] if it is set.
pub fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Runs one parsed command, printing a short report on stdout and warnings on stderr.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    init_workers()?;
    match &cli.command {
        Command::Dispersion(c) => {
            let cfg = c.config()?;
            let summary = commands::cmd_dispersion(&cfg)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for r in &summary.rows {
                println!(
                    "{:<28} delta={:<12} std={:<10} plateau={} series={}",
                    r.k.to_string(),
                    output::opt9(r.delta),
                    output::opt9(r.slope_std),
                    r.plateau_ok,
                    output::opt9(r.series_ref)
                );
            }
            println!("wrote {}", cfg.output.dir.display());
        }
        Command::Converge(c) => {
            let cfg = c.config()?;
            let report = commands::cmd_converge(&cfg)?;
            for e in &report.entries {
                if !e.plateau_ok {
                    eprintln!("warning: D={} has trials without a plateau", e.d);
                }
                println!("D={:<3} mean={:<12} std={}", e.d, output::sig9(e.mean), output::sig9(e.std));
            }
            if let Some(r) = report.reference {
                println!("series reference {}", output::sig9(r));
            }
            println!("wrote {}", cfg.output.dir.display());
        }
        Command::Oracle(c) => {
            let cfg = c.config()?;
            let (spec, _) = commands::series_reference(&cfg.model)?;
            if !spec.within_validity() {
                eprintln!(
                    "warning: coupling {} lies outside the series' validity range",
                    output::sig9(spec.coupling)
                );
            }
            let rows = commands::cmd_oracle(&cfg)?;
            println!("{} series points, wrote {}", rows.len(), cfg.output.dir.display());
        }
    }
    Ok(())
}
