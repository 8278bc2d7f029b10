//! Library side of the `kdefect` command-line tool.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;

use args::{Cli, Command};
use commands::Outcome;
use error::Result;

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Defect(a) => commands::run_defect(a),
        Command::Bound(a) => commands::run_bound(a),
        Command::Verify(a) => commands::run_verify(a),
        Command::Sample(a) => commands::run_sample(a),
        Command::Bench(a) => commands::run_bench(a),
    }
}

/// Where the command asked its output to go.
pub fn out_path(cli: &Cli) -> Option<&std::path::Path> {
    match &cli.command {
        Command::Defect(a) => a.output.out.as_deref(),
        Command::Bound(a) => a.output.out.as_deref(),
        Command::Verify(a) => a.output.out.as_deref(),
        Command::Sample(a) => a.output.out.as_deref(),
        Command::Bench(a) => a.out.as_deref(),
    }
}
