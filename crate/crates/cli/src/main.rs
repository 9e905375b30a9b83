//! `qjf`: jump-counting statistics of Lindblad models from the command line.

mod commands;
mod error;
mod output;
mod source;

use clap::{Parser, Subcommand};

use commands::{doob_build, example, sample, scgf, verify};
use error::{exit, CliError};

const AFTER_HELP: &str = "\
Exit codes: 0 success, 1 verification failed, 2 invalid input or model, \
3 spectral solver failure, 4 symmetry precondition violated, 5 sampler failure.

Tolerances (--tol NAME=VALUE): dim_cap, degeneracy_gap, imag_tol, zero_trace_tol, \
residual_tol, psd_tol, consistency_tol, verify_tol, max_step, step_scale, time_tol, fd_step.

QJF_THREADS caps the number of worker threads.";

#[derive(Parser, Debug)]
#[command(name = "qjf", version, about, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan the scaled cumulant generating function over a tilt grid (CSV).
    Scgf(scgf::ScgfArgs),
    /// Build the Doob dynamics at bias s and write it as a model file.
    DoobBuild(doob_build::DoobBuildArgs),
    /// Sample quantum-jump trajectories (JSONL plus a summary).
    Sample(sample::SampleArgs),
    /// Check the symmetry, similarity and fluctuation relation (JSON).
    Verify(verify::VerifyArgs),
    /// Describe a built-in example or export it as a model file.
    Example(example::ExampleArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("QJF_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::input(format!("QJF_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Scgf(a) => scgf::run(a),
        Command::DoobBuild(a) => doob_build::run(a),
        Command::Sample(a) => sample::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Example(a) => example::run(a),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qjf: {e}");
            e.code
        }
    };
    std::process::exit(if code == exit::OK { 0 } else { code });
}
