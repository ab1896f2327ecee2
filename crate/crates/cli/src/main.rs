//! `loewner-ito`: simulate randomized radial Loewner chains, transform them
//! into the corresponding Ito diffusion, and check which drivers admit the
//! transformation.
//!
//! Every subcommand reads one JSON config (see the README for the schema),
//! honors `LOEWNER_ITO_SEED` and `--set key=value` dotted-path overrides,
//! and writes CSV/JSON artifacts into `--out`. Exit codes: 0 success,
//! 1 config/validation failure, 2 runtime or domain error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration; exit code 1.
    Validation(String),
    /// Domain or runtime failure; exit code 2.
    Runtime(String),
}

#[derive(Parser)]
#[command(name = "loewner-ito", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path config overrides, e.g. --set grid.n_steps=512.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the classical or randomized Loewner flow to CSV.
    Simulate(CommonArgs),
    /// Integrate the transformed diffusion by Euler-Maruyama to CSV.
    Sde(CommonArgs),
    /// Refinement study of the chain-to-diffusion substitution (JSON).
    VerifyTransform(CommonArgs),
    /// Compare the closed-form generator with a Monte Carlo estimate (JSON).
    Generator(CommonArgs),
    /// Decide driver admissibility from the log-tau Hessian (JSON).
    Classify(CommonArgs),
    /// Scan a Herglotz spec for nonnegative real part (JSON).
    ValidateHerglotz(CommonArgs),
}

fn run(command: &Command) -> Result<(), CliError> {
    let (args, runner): (&CommonArgs, commands::Runner) = match command {
        Command::Simulate(args) => (args, commands::simulate),
        Command::Sde(args) => (args, commands::sde),
        Command::VerifyTransform(args) => (args, commands::verify_transform_cmd),
        Command::Generator(args) => (args, commands::generator),
        Command::Classify(args) => (args, commands::classify),
        Command::ValidateHerglotz(args) => (args, commands::validate_herglotz),
    };
    let (config, resolved) = config::load(&args.config, &args.set)?;
    std::fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", args.out.display()))
    })?;
    runner(&config, &resolved, &args.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
