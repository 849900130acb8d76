//! `wasscov`: Wasserstein covariance estimation and testing from CSV files.
//!
//! Exit codes: 0 success, 1 usage error, 2 data validation error,
//! 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;

use config::Overrides;
use wasscov::inference::StatisticKind;
use wasscov::Bandwidth;

#[derive(Debug, Parser)]
#[command(name = "wasscov", version, about = "Wasserstein covariance for vectors of one-dimensional densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate quantile functions from raw samples or histograms.
    Estimate {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        est: EstimationArgs,
    },
    /// Wasserstein covariance and correlation matrices, means and surface.
    Cov {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        est: EstimationArgs,
    },
    /// Bootstrap test for equal covariance structure across groups.
    Test {
        #[command(flatten)]
        io: IoArgs,
        /// Two-column CSV `subject_id,group`.
        #[arg(long)]
        groups: PathBuf,
        #[command(flatten)]
        est: EstimationArgs,
        #[command(flatten)]
        mc: MonteCarloArgs,
        /// log_frobenius, sqrt_distance, corr_log_frobenius or corr_sqrt_distance.
        #[arg(long, value_parser = parse_statistic)]
        statistic: Option<StatisticKind>,
    },
    /// Monte Carlo convergence-rate experiment for a location-scale law.
    Simulate {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        est: EstimationArgs,
        #[command(flatten)]
        mc: MonteCarloArgs,
    },
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Input file (samples, histograms or quantiles; a JSON law spec for `simulate`).
    #[arg(long)]
    input: PathBuf,
    /// Flat `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct EstimationArgs {
    /// Quantile grid size on [0, 1].
    #[arg(long)]
    grid: Option<usize>,
    /// Kernel bandwidth: `auto` or a positive number.
    #[arg(long, value_parser = config::parse_bandwidth)]
    bandwidth: Option<Bandwidth>,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Bootstrap or Monte Carlo replicates.
    #[arg(long)]
    reps: Option<usize>,
}

fn parse_statistic(s: &str) -> Result<StatisticKind, String> {
    s.parse().map_err(|e: wasscov::Error| e.to_string())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(#[from] wasscov::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(e) if e.is_numerical() => 3,
            CliError::Data(_) | CliError::Io { .. } => 2,
        }
    }
}

fn overrides(est: &EstimationArgs, mc: Option<&MonteCarloArgs>, statistic: Option<StatisticKind>) -> Overrides {
    Overrides {
        grid: est.grid,
        bandwidth: est.bandwidth,
        reps: mc.and_then(|m| m.reps),
        seed: mc.and_then(|m| m.seed),
        statistic,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate { io, est } => {
            let settings = config::Settings::load(io.config.as_deref(), &overrides(&est, None, None))?;
            commands::estimate(&io.input, &io.out_dir, &settings)
        }
        Command::Cov { io, est } => {
            let settings = config::Settings::load(io.config.as_deref(), &overrides(&est, None, None))?;
            commands::cov(&io.input, &io.out_dir, &settings)
        }
        Command::Test { io, groups, est, mc, statistic } => {
            let settings = config::Settings::load(io.config.as_deref(), &overrides(&est, Some(&mc), statistic))?;
            commands::test(&io.input, &groups, &io.out_dir, &settings)
        }
        Command::Simulate { io, est, mc } => {
            let settings = config::Settings::load(io.config.as_deref(), &overrides(&est, Some(&mc), None))?;
            commands::simulate(&io.input, &io.out_dir, &settings, est.grid, mc.reps)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
