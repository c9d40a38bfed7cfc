//! `entperc`: analytic and Monte Carlo experiments on entanglement
//! percolation with q-swap strategies.
//!
//! Each run writes `manifest.json` (status `running`) into the output
//! directory before any computation, then `results.csv`, then the manifest
//! again with its final status and a summary. Passing a manifest back via
//! `--config` repeats the run.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entperc::EtaModel;

use config::{Command, ExperimentConfig, Grid, LinkSpec, NetworkSpec, StrategySpec};
use error::CliError;
use output::{Manifest, Status};

#[derive(Debug, Parser)]
#[command(
    name = "entperc",
    version,
    about = "Entanglement percolation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    #[command(flatten)]
    args: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Generating-function solution over the p grid, with thresholds and gain.
    Analytic,
    /// Monte Carlo sweep over the p grid.
    Simulate,
    /// Analytic and Monte Carlo side by side, with their deviation.
    Compare,
    /// Threshold change of each single-degree q-swap and the resulting strategy.
    StrategySearch,
    /// Threshold gains over a grid of the network parameter (z or kappa).
    GainSweep,
}

impl From<&Sub> for Command {
    fn from(s: &Sub) -> Self {
        match s {
            Sub::Analytic => Command::Analytic,
            Sub::Simulate => Command::Simulate,
            Sub::Compare => Command::Compare,
            Sub::StrategySearch => Command::StrategySearch,
            Sub::GainSweep => Command::GainSweep,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file or a previous run's manifest; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed for all random draws.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Maximum number of worker threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Occupation grid `start:end:steps`.
    #[arg(long, global = true, value_name = "A:B:STEPS")]
    p_grid: Option<Grid>,

    /// Grid of z (er, poisson) or kappa (powerlaw) for gain-sweep.
    #[arg(long, global = true, value_name = "A:B:STEPS")]
    x_grid: Option<Grid>,

    /// er:z=..,n=.. | config:dist=poisson|powerlaw|delta|file,...,n=.. | sw:phi=..,n=.. | edgelist:PATH,cutoff=..
    #[arg(long, global = true, value_name = "SPEC")]
    network: Option<NetworkSpec>,

    /// p=..|lambda0=..,mode=sequential|distilled
    #[arg(long, global = true, value_name = "SPEC")]
    link: Option<LinkSpec>,

    /// Degrees to swap (`2,3`), `none`, or `optimal:qmax=10`.
    #[arg(long, global = true, value_name = "SPEC")]
    strategy: Option<StrategySpec>,

    /// Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Trial batches for the error bar on the simulated threshold.
    #[arg(long, global = true)]
    batches: Option<usize>,

    /// Swap-probability model for the analytic giant component.
    #[arg(long, global = true, value_name = "MODEL")]
    eta: Option<EtaModel>,
}

impl RunArgs {
    fn overrides(&self, command: Command) -> ExperimentConfig {
        ExperimentConfig {
            command: Some(command),
            network: self.network.clone(),
            link: self.link.clone(),
            strategy: self.strategy.clone(),
            p_grid: self.p_grid,
            x_grid: self.x_grid,
            trials: self.trials,
            batches: self.batches,
            seed: self.seed,
            eta: self.eta,
            out: self.out.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    if let Some(n) = cli.args.threads {
        if n == 0 {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
    }
    let base = match &cli.args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let echo = base
        .merge(cli.args.overrides((&cli.command).into()))
        .with_defaults();
    let resolved = echo.clone().resolve()?;

    std::fs::create_dir_all(&resolved.out).map_err(|source| CliError::Output {
        path: resolved.out.clone(),
        source,
    })?;
    let mut manifest = Manifest::new(resolved.command, resolved.seed, echo);
    manifest.write(&resolved.out)?;

    match run::execute(&resolved) {
        Ok(summary) => {
            manifest.status = Status::Ok;
            manifest.summary = Some(summary);
            manifest.write(&resolved.out)?;
            Ok(resolved.out)
        }
        Err(e) => {
            manifest.status = Status::Failed;
            manifest.error = Some(e.to_string());
            // The original error matters more than a failure to record it.
            let _ = manifest.write(&resolved.out);
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            println!("{}", out.join(output::MANIFEST).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
