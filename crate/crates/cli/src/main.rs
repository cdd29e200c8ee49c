//! `polydg`: mesh generation, agglomeration, multigrid solves and studies.

mod args;
mod commands;
mod study;

use args::{Cli, Command};
use clap::Parser;
use std::process::ExitCode;

/// Process exit codes.
pub mod exit {
    pub const USAGE: u8 = 1;
    pub const NOT_CONVERGED: u8 = 2;
    pub const VALIDITY: u8 = 3;
}

/// Marks a run whose solver did not reach the tolerance; the report has
/// already been written when this is returned.
#[derive(Debug)]
pub struct NotConverged(pub String);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "solver did not converge: {}", self.0)
    }
}

impl std::error::Error for NotConverged {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NotConverged>().is_some() {
        return exit::NOT_CONVERGED;
    }
    match err.downcast_ref::<polydg::Error>() {
        Some(
            polydg::Error::MeshValidity(_)
            | polydg::Error::Hierarchy(_)
            | polydg::Error::DegenerateElement { .. }
            | polydg::Error::Generator(_)
            | polydg::Error::Parse { .. },
        ) => exit::VALIDITY,
        _ => exit::USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Mesh(a) => commands::mesh(a),
        Command::Hierarchy(a) => commands::hierarchy(a),
        Command::Solve(a) => commands::solve(a),
        Command::Study(a) => study::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
