//! Batch front-end for `lbexp`: reads a TOML run configuration and writes
//! plot-ready CSV and JSON artifacts.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures and 1 for I/O errors on the output directory.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use lbexp::Execution;

pub use config::{Command, ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error at {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] lbexp::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

/// Runs one command and returns the paths written, in order.
pub fn execute(command: Command, config: RunConfig, out: &Path, exec: Execution) -> Result<Vec<PathBuf>, CliError> {
    let ctx = commands::Context::new(config, command, exec)?;
    let mut sink = output::Sink::create(out)?;
    commands::run(command, &ctx, &mut sink)?;
    Ok(sink.into_paths())
}
