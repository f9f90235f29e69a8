//! `suspension-lab`: seeded experiments and checks from the command line.
//!
//! Exit status: 0 on success, 1 when a statistical check fails, 2 on usage
//! errors and 3 when a word cap, column truncation or size limit is hit.

mod cli;
mod commands;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use suspension_lab::config::ExperimentConfig;

use cli::Cli;
use error::CliError;

const THREADS_VAR: &str = "SUSPENSION_LAB_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::usage(THREADS_VAR, format!("expected a thread count, got {raw:?}")))?;
    // 0 keeps rayon's default of one thread per core
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| CliError::usage("--config", e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.display().to_string());
    }
    config.validate().map_err(|e| {
        let flag = if cli.trials == Some(0) { "--trials" } else { "--config" };
        CliError::usage(flag, e.to_string())
    })?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    init_threads()?;
    let config = resolve_config(cli)?;
    let outcome = commands::run(&cli.command, &config)?;
    match &config.out {
        Some(path) => std::fs::write(path, &outcome.text).map_err(|e| CliError::usage("--out", e.to_string()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(!outcome.failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage { .. }) {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code())
        }
    }
}
