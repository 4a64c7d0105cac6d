//! `ccqp`: generate, solve and check composite quadratic programs.
//!
//! Exit codes: 0 success, 2 iteration budget exhausted, 1 any other failure
//! (including usage errors and failed checks).

mod check;
mod compare;
mod gen;
mod problem_file;
mod report;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ccqp",
    version,
    about = "ADMM and three-operator splitting solvers for composite quadratic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated problem instance.
    Gen(gen::GenArgs),
    /// Solve a problem file.
    Solve(solve::SolveArgs),
    /// Run an equivalence, Moreau-identity or residual-soundness check.
    Check(check::CheckArgs),
    /// Sweep algorithms and parameters and tabulate the outcomes.
    Compare(compare::CompareArgs),
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Success,
    NoConvergence,
    CheckFailed,
}

/// `auto` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Auto {
    Auto,
    Value(f64),
}

impl std::str::FromStr for Auto {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Auto::Auto);
        }
        s.parse::<f64>()
            .map(Auto::Value)
            .map_err(|_| format!("expected `auto` or a number, got {s:?}"))
    }
}

pub fn write_output(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    use anyhow::Context;
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Solve(a) => solve::run(a),
        Command::Check(a) => check::run(a),
        Command::Compare(a) => compare::run(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NoConvergence) => ExitCode::from(2),
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
