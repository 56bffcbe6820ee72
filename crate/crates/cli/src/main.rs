//! `levytail` command-line front end.

mod args;
mod commands;
mod error;
mod input;
mod output;

use clap::Parser;

use crate::args::Cli;
use crate::error::{CliError, CliResult};

const THREADS_ENV: &str = "LEVYTAIL_THREADS";

fn configure_threads(flag: Option<u16>) -> CliResult<()> {
    let threads = match flag {
        Some(t) => Some(usize::from(t)),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(t) if t > 0 => Some(t),
                _ => {
                    return Err(CliError::Usage(format!(
                        "{THREADS_ENV} must be a positive integer, got `{v}`"
                    )))
                }
            },
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {t} threads: {e}")))?;
    }
    Ok(())
}

fn run() -> CliResult<()> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    configure_threads(cli.threads)?;
    let outcome = commands::execute(cli.command)?;
    for path in outcome.written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
