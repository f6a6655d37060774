use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;
mod output;

use error::CliError;

/// Weierstrass surfaces over P^1, their ramification divisors and Torelli round trips.
#[derive(Parser)]
#[command(name = "torelli-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Generate(commands::generate::Opts),
    Analyze(commands::analyze::Opts),
    Ivhs(commands::ivhs::Opts),
    Recover(commands::recover::Opts),
    Roundtrip(commands::roundtrip::Opts),
    PlumbVerify(commands::plumb::Opts),
    Oracle(commands::oracle::Opts),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TORELLI_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("TORELLI_LAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Generate(o) => commands::generate::run(o),
        Command::Analyze(o) => commands::analyze::run(o),
        Command::Ivhs(o) => commands::ivhs::run(o),
        Command::Recover(o) => commands::recover::run(o),
        Command::Roundtrip(o) => commands::roundtrip::run(o),
        Command::PlumbVerify(o) => commands::plumb::run(o),
        Command::Oracle(o) => commands::oracle::run(o),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
