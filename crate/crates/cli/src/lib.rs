//! Command-line front end for the `ris-locbf` simulator.
//!
//! Runs read a flat `key = value` configuration, execute one subcommand and
//! write CSV tables into an output directory. Every table starts with
//! `# config:` lines holding the complete configuration, so stripping that
//! prefix from a table's header yields a file that reproduces the run.

pub mod commands;
pub mod config;
pub mod table;

use std::path::{Path, PathBuf};

use clap::Parser;

pub use commands::Command;
pub use config::{ConfigError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "ris-locbf", version, about = "Location-driven RIS beamforming experiments")]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Configuration file; every missing key takes its default.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory receiving the CSV outputs (created if missing).
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for Monte-Carlo sweeps; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Simulation(#[from] ris_locbf::Error),
    #[error("non-finite values in {file}: {count} cells, first in column '{column}' of row {row}")]
    NonFinite {
        file: String,
        count: usize,
        column: &'static str,
        row: usize,
    },
}

impl CliError {
    /// 2 for numeric failures in the output, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::NonFinite { .. } => 2,
            _ => 1,
        }
    }
}

/// Reads and validates a configuration file, logging every default to
/// standard error.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let (name, text) = match path {
        Some(p) => (
            p.display().to_string(),
            std::fs::read_to_string(p).map_err(|source| CliError::Io {
                context: format!("reading {}", p.display()),
                source,
            })?,
        ),
        None => ("<defaults>".to_string(), String::new()),
    };
    let config = RunConfig::parse(&text).map_err(|source| CliError::Config { path: name, source })?;
    let entries = config.entries();
    for key in config.defaulted() {
        if let Some((_, value)) = entries.iter().find(|(k, _)| k == key) {
            eprintln!("default: {key} = {value}");
        }
    }
    Ok(config)
}

/// Runs one subcommand and writes its tables. Files are written even when
/// they contain non-finite values; the error then reports them.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut config = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    let outputs = commands::execute(cli.command, &config, cli.workers)?;
    std::fs::create_dir_all(&cli.out).map_err(|source| CliError::Io {
        context: format!("creating {}", cli.out.display()),
        source,
    })?;
    let mut written = Vec::new();
    let mut numeric_failure = None;
    for (name, table) in &outputs {
        let path = cli.out.join(name);
        table.write_to(&path).map_err(|source| CliError::Io {
            context: format!("writing {}", path.display()),
            source,
        })?;
        let bad = table.non_finite();
        if let (Some(&(row, column)), None) = (bad.first(), &numeric_failure) {
            numeric_failure = Some(CliError::NonFinite {
                file: path.display().to_string(),
                count: bad.len(),
                column,
                row,
            });
        }
        written.push(path);
    }
    match numeric_failure {
        Some(e) => Err(e),
        None => Ok(written),
    }
}
