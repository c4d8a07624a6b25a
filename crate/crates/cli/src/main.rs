mod commands;
mod config;
mod report;

use clap::Parser;
use config::{Cli, Command};
use pretlab::par::Exec;
use report::{CliError, Config};
use std::process::ExitCode;
use std::time::Instant;

const DEFAULT_SIEVE_LIMIT: u64 = 10_000_000;

fn sieve_limit() -> Result<u64, CliError> {
    match std::env::var("PRETLAB_SIEVE_LIMIT") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("PRETLAB_SIEVE_LIMIT must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_SIEVE_LIMIT),
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads(cli.run.threads)?;
    let exec = if cli.run.sequential { Exec::Sequential } else { Exec::Parallel };
    let config = match cli.command {
        Command::Rerun(args) => report::read_config(&args.report)?,
        command => Config {
            command,
            sieve_limit: sieve_limit()?,
        },
    };
    let start = Instant::now();
    let output = commands::execute(&config.command, config.sieve_limit, exec)?;
    let elapsed = start.elapsed().as_secs_f64();
    report::emit(&config, &output, elapsed, cli.run.format, cli.run.output.as_deref())?;
    Ok(output.exit_code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
