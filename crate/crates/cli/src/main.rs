//! Command-line entry point of the order book toolkit.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "lobflow",
    version,
    about = "Scaled limit order book simulation and fluid limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path of the discrete book.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Model index overriding `run.n`.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Solve the limiting price ODE and volume PDE.
    Limit {
        #[command(flatten)]
        common: Common,
    },
    /// Run the convergence study and the martingale-difference check.
    Converge {
        #[command(flatten)]
        common: Common,
    },
    /// Compute an optimal liquidation schedule.
    Liquidate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed overriding `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let mut config = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.run.seed = seed;
        }
        std::fs::create_dir_all(&self.out)?;
        Ok(config)
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<commands::Outcome> {
    commands::init_threads()?;
    match cli.command {
        Command::Simulate { common, n } => {
            let mut config = common.load()?;
            if let Some(n) = n {
                config.run.n = n;
                config.validate()?;
            }
            commands::simulate(&config, &common.out)
        }
        Command::Limit { common } => commands::limit(&common.load()?, &common.out),
        Command::Converge { common } => commands::converge(&common.load()?, &common.out),
        Command::Liquidate { common } => commands::liquidate(&common.load()?, &common.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Fail) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
