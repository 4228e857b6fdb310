//! Command-line front end: scenario files in, CSV/JSON/SVG artifacts out.

pub mod commands;
pub mod error;
pub mod output;
pub mod plot;
pub mod scenario;
pub mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};
use sweep::SweepParam;

#[derive(Debug, Parser)]
#[command(name = "beam", version, about = "Damped nonlinear beam: simulate, solve, verify, sweep")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the scenario in time and write the energy trajectory.
    Simulate {
        scenario: PathBuf,
        #[arg(short, long = "out")]
        out: PathBuf,
    },
    /// Solve the stationary problem.
    Stationary {
        scenario: PathBuf,
        #[arg(short, long = "out")]
        out: PathBuf,
    },
    /// Run every energy and convergence check and print a PASS/FAIL table.
    Verify { scenario: PathBuf },
    /// Simulate the Cartesian product of parameter lists.
    Sweep {
        scenario: PathBuf,
        /// `section.key=v1,v2,...`, repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<SweepParam>,
        #[arg(short, long = "out")]
        out: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn parse_param(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { scenario, out } => commands::simulate(&scenario, &out),
        Command::Stationary { scenario, out } => commands::stationary(&scenario, &out),
        Command::Verify { scenario } => commands::verify(&scenario).map(|_| ()),
        Command::Sweep { scenario, params, out, jobs } => sweep::sweep(&scenario, &params, &out, jobs),
    }
}
