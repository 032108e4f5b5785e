//! Command-line front end: JSON experiment configs in, CSV tables out.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

pub use commands::{execute, summarize, summary_from_csv, Outcome};
pub use config::{load_config, ExperimentConfig, Grid, Layer};

#[derive(Debug, Parser)]
#[command(name = "swarm-sacrifice", version, about = "Collective localization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean-field steady-state curves.
    Meanfield(RunArgs),
    /// Well-mixed agent-based sweep.
    Wellmixed(RunArgs),
    /// Robots on a cylinder: formation, coverage or recorded trajectories.
    Spatial(RunArgs),
    /// Any layer, chosen by the config's `layer` field.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment config. Omitted means all defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for parallel runs.
    #[arg(long, env = "SWARM_SACRIFICE_WORKERS")]
    pub workers: Option<usize>,
    /// Top-level config overrides, `KEY=VALUE` with VALUE parsed as JSON when possible.
    pub overrides: Vec<String>,
}

/// Parses, runs and returns the outcome; `main` only prints it.
pub fn run_cli(cli: Cli) -> Result<Outcome> {
    let (layer, args) = match cli.command {
        Command::Meanfield(a) => (Some(Layer::Meanfield), a),
        Command::Wellmixed(a) => (Some(Layer::Wellmixed), a),
        Command::Spatial(a) => (Some(Layer::Spatial), a),
        Command::Sweep(a) => (None, a),
    };
    if let Some(n) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    let mut config = load_config(args.config.as_deref(), &args.overrides)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let layer = match (layer, config.layer) {
        (Some(l), _) => l,
        (None, Some(l)) => l,
        (None, None) => anyhow::bail!("`sweep` needs `layer` in the config"),
    };
    execute(layer, &config, &args.out)
}
