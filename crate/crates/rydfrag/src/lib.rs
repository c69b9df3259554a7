//! Command-line driver for `rydfrag-core`: configuration files, output
//! formats and the `rydfrag` subcommands.

pub mod commands;
pub mod config;
mod error;
pub mod format;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigFile, InitialState, Model, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rydfrag", version, about = "Dephasing Rydberg chains: dynamics, Liouvillian spectra and fragmentation")]
pub struct Cli {
    /// JSON file whose keys mirror the flags; flags win on conflict.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Number of sites (upper length for `count`).
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Nearest-neighbour interaction.
    #[arg(long)]
    pub v: Option<f64>,
    /// Dephasing rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Interaction shells kept.
    #[arg(long)]
    pub range: Option<usize>,
    /// Bitstring with site 1 first, or `mixed`.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Output times from 0 to t-max inclusive.
    #[arg(long)]
    pub points: Option<usize>,
    /// Integrator step; defaults to 0.1 / max(V, gamma, omega).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl From<RunArgs> for ConfigFile {
    fn from(a: RunArgs) -> Self {
        ConfigFile {
            model: a.model,
            length: a.length,
            omega: a.omega,
            v: a.v,
            gamma: a.gamma,
            range: a.range,
            initial: a.initial,
            t_max: a.t_max,
            points: a.points,
            dt: a.dt,
            jobs: a.jobs,
            out: a.out,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the master equation and write `t,M,purity,cdea`.
    Evolve {
        #[command(flatten)]
        run: RunArgs,
        /// Run every basis state, one file each.
        #[arg(long)]
        all_initial_states: bool,
    },
    /// Diagonalize the Liouvillian and write `re,im` plus a summary.
    Spectrum {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Enumerate the fragments of the constrained model as JSON.
    Classes {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate fragment counts for L = 1..=length (default 20).
    Count {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Mean-field rate and decay time over a sweep of dephasing rates.
    Meanfield {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated dephasing rates.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        gammas: Vec<f64>,
        /// Neighbour excitation probability.
        #[arg(long, default_value_t = 0.5)]
        q: f64,
    },
}

const DEFAULT_COUNT_LENGTH: usize = 20;

fn layered(config: &Option<PathBuf>, run: RunArgs) -> Result<ConfigFile, CliError> {
    let base = match config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Ok(base.merged(run.into()))
}

/// Executes one parsed invocation, reporting written files on `stdout`.
pub fn run<W: Write>(cli: Cli, mut stdout: W) -> Result<(), CliError> {
    let budget = commands::memory_budget()?;
    let report = |stdout: &mut W, path: &std::path::Path| {
        writeln!(stdout, "wrote {}", path.display()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
    };
    match cli.command {
        Command::Evolve { run, all_initial_states } => {
            let cfg = layered(&cli.config, run)?.resolve()?;
            for path in commands::cmd_evolve(&cfg, all_initial_states, budget)? {
                report(&mut stdout, &path)?;
            }
        }
        Command::Spectrum { run } => {
            let cfg = layered(&cli.config, run)?.resolve()?;
            let (paths, summary) = commands::cmd_spectrum(&cfg, budget)?;
            for path in &paths {
                report(&mut stdout, path)?;
            }
            writeln!(stdout, "{}", summary.line()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
        Command::Classes { run } => {
            let cfg = layered(&cli.config, run)?.resolve()?;
            report(&mut stdout, &commands::cmd_classes(cfg.chain.length, &cfg.out)?)?;
        }
        Command::Count { run } => {
            let mut file = layered(&cli.config, run)?;
            file.length = file.length.or(Some(DEFAULT_COUNT_LENGTH));
            let cfg = file.resolve()?;
            report(&mut stdout, &commands::cmd_count(cfg.chain.length, &cfg.out)?)?;
        }
        Command::Meanfield { run, gammas, q } => {
            let cfg = layered(&cli.config, run)?.resolve()?;
            let path = commands::cmd_meanfield(cfg.chain.omega, cfg.chain.v, q, &gammas, &cfg.out)?;
            report(&mut stdout, &path)?;
        }
    }
    Ok(())
}
