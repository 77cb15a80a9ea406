//! `cdm`: generate data, train and evaluate models, and run the simulation
//! experiments from JSON configs.
//!
//! Standard output carries exactly one JSON document per invocation; human
//! messages go to standard error. Exit codes: 0 success, 2 configuration
//! error, 3 I/O or data error, 4 method precondition failure.

mod commands;
mod config;
mod failure;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Parser)]
#[command(
    name = "cdm",
    version,
    about = "Causal decision making: effect models, policies and their evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Gen(Common),
    /// Fit a model and save it as JSON.
    Train(Common),
    /// Evaluate a saved model on a test file.
    Eval(Common),
    /// Run biased-vs-unbiased decision scenarios.
    Simulate(Common),
    /// Run the confounding or proxy-target experiment.
    Experiment(Common),
}

#[derive(Args)]
pub struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; relative output paths in the config resolve against it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip malformed CSV rows instead of failing on the first one.
    #[arg(long)]
    skip_bad_rows: bool,
    /// CSV schema JSON used when the config does not embed one.
    #[arg(long)]
    schema: Option<PathBuf>,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("CDM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::config(format!(
            "CDM_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<serde_json::Value, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Gen(c) => commands::gen(&c),
        Command::Train(c) => commands::train(&c),
        Command::Eval(c) => commands::eval(&c),
        Command::Simulate(c) => commands::simulate(&c),
        Command::Experiment(c) => commands::experiment(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(doc) => {
            let text = serde_json::to_string_pretty(&doc).expect("reports serialize");
            // A closed pipe downstream is not our failure.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
