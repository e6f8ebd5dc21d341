//! `rigfit`: fit rotations to joint trajectories, evaluate animations, and
//! prepare data.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 internal error.
//! Logging goes to stderr and is filtered by `RIGFIT_LOG`.

mod commands;
mod failure;
mod inputs;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{eval, fit, inspect, normalize, synth};
use failure::Kind;

#[derive(Debug, Parser)]
#[command(name = "rigfit", version, about = "Recover joint rotations from 3D joint trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a rig to a trajectory and write the animation as BVH.
    Fit(fit::FitArgs),
    /// Compare two animations or trajectories; prints a JSON report.
    Eval(eval::EvalArgs),
    /// Scale a trajectory into [-1, 1]³, or undo it.
    Normalize(normalize::NormalizeArgs),
    /// Generate a seeded smooth clip for a rig, as BVH plus trajectory JSON.
    Synth(synth::SynthArgs),
    /// Print a rig's joint tree.
    Inspect(inspect::InspectArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RIGFIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Kind::Validation.exit_code() } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => fit::run(a),
        Command::Eval(a) => eval::run(a),
        Command::Normalize(a) => normalize::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Inspect(a) => inspect::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.kind.exit_code()
        }
    }
}
