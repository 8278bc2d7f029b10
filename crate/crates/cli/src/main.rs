use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kron_defect_cli::args::Cli;
use kron_defect_cli::error::CliError;

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match kron_defect_cli::out_path(cli) {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = kron_defect_cli::run(&cli).and_then(|outcome| {
        emit(&cli, &outcome.output)?;
        outcome.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kdefect: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
