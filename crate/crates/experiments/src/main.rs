use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rtt_experiments::commands;
use rtt_experiments::{ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "rtt", version, about = "Transport tomography twin experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; built-in desk-scale defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Regularization target: `alpha_min` for calibrate, `alpha_fixed` for pgn.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Consistency suites (adjoint, Taylor, forward accuracy, gradient, surrogate).
    Check,
    /// Phantom data and the minimizer x† at the smallest α.
    Calibrate,
    /// Convergence rates of x_α towards x† over the configured α list.
    Rates,
    /// Fixed-α PGN convergence towards x_α after a restart.
    Pgn,
    /// Forward fields and outflow at the phantom.
    Forward,
    /// Print the effective configuration as TOML.
    Config,
}

fn run(cli: Cli) -> Result<String> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(alpha) = cli.alpha {
        match cli.command {
            Command::Calibrate => config.regularization.alpha_min = alpha,
            _ => config.regularization.alpha_fixed = alpha,
        }
        // Re-validate the overridden value.
        config = ExperimentConfig::parse(&config.to_toml())?;
    }
    let out = config.output_dir.clone();
    match cli.command {
        Command::Check => commands::cmd_check(&config),
        Command::Calibrate => commands::cmd_calibrate(&config, &out),
        Command::Rates => commands::cmd_rates(&config, &out),
        Command::Pgn => commands::cmd_pgn(&config, &out),
        Command::Forward => commands::cmd_forward(&config, &out),
        Command::Config => Ok(config.to_toml()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
