//! Experiment runner for the generating functional over Hilbert-space paths.
//!
//! Exit codes: 0 success, 1 I/O failure or failed selftest, 2 invalid
//! configuration, 3 an optimization did not converge.

mod commands;
mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Run, Status};

#[derive(Parser, Debug)]
#[command(author, version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug)]
struct Flags {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Run seed: overrides the optimizer seed and fills omitted seeds.
    #[arg(long)]
    seed: Option<u64>,

    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Run the built-in checks for this subcommand and exit.
    #[arg(long)]
    selftest: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate Z for an initial and a final state.
    Zeval(Flags),
    /// Convergence table of the coherent-state lattice, as CSV.
    Lattice(Flags),
    /// Maximize |Z| over final states.
    Optimize(Flags),
    /// Quantumness-penalized path optimization over a lambda sweep.
    Collapse(Flags),
}

#[derive(Clone, Copy, Debug)]
pub enum Command {
    Zeval,
    Lattice,
    Optimize,
    Collapse,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Zeval => "zeval",
            Self::Lattice => "lattice",
            Self::Optimize => "optimize",
            Self::Collapse => "collapse",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Zeval(f) => (Command::Zeval, f),
        Cmd::Lattice(f) => (Command::Lattice, f),
        Cmd::Optimize(f) => (Command::Optimize, f),
        Cmd::Collapse(f) => (Command::Collapse, f),
    };

    if flags.selftest {
        return if selftest::run(command) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    }

    let result = commands::config_path(flags.config).and_then(|config| {
        let run = Run { config: &config, seed: flags.seed, out: flags.out.as_deref() };
        match command {
            Command::Zeval => commands::zeval(&run),
            Command::Lattice => commands::lattice(&run),
            Command::Optimize => commands::optimize(&run),
            Command::Collapse => commands::collapse(&run),
        }
    });

    match result {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("{}: optimization did not converge", command.name());
            ExitCode::from(3)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("{}: invalid configuration: {msg}", command.name());
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("{}: {e}", command.name());
            ExitCode::FAILURE
        }
    }
}
