//! Command-line front end: data ingestion, tuning configuration, method
//! dispatch and machine-readable outputs.
//!
//! Every subcommand is a pure function of its input files, flags and seed:
//! repeated invocations produce byte-identical outputs. Parallelism is
//! capped by the `SURVENET_THREADS` environment variable.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use survenet::Error;

#[derive(Parser)]
#[command(
    name = "survenet",
    version,
    about = "Regularized AFT model fitting and variable selection for right-censored data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one estimator with full tuning and write the model as JSON.
    Fit(commands::FitArgs),
    /// Cross-validate tuning parameters and report the full surface.
    Cv(commands::FitArgs),
    /// Generate a dataset from a benchmark design, or run a
    /// selection-frequency study when --replicates is set.
    Simulate(commands::SimulateArgs),
    /// 0.632 bootstrap variance of a fitted estimator.
    Bootstrap(commands::BootstrapArgs),
    /// Sure independence screening report.
    Screen(commands::ScreenArgs),
    /// Fit on training data and evaluate on a test set.
    Evaluate(commands::EvaluateArgs),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NoConvergence { .. } | Error::BracketFailure(_) | Error::ScoreUndefined(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SURVENET_THREADS") {
        if let Ok(n) = threads.trim().parse::<usize>() {
            if n > 0 {
                // ignore failure: the pool may already be initialized
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => commands::run_fit(args, false),
        Command::Cv(args) => commands::run_fit(args, true),
        Command::Simulate(args) => commands::run_simulate(args),
        Command::Bootstrap(args) => commands::run_bootstrap(args),
        Command::Screen(args) => commands::run_screen(args),
        Command::Evaluate(args) => commands::run_evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("survenet: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
