//! Batch front-end: configuration files, single solves, sweeps and the
//! validation suite.

pub mod config;
pub mod run;
pub mod sweep;
pub mod validate;

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration errors:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn numerical(e: mond_equilibria::Error) -> Self {
        CliError::Numerical(e.to_string())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// 2 for configuration problems, 3 for numerical and i/o failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

pub const EXIT_VALIDATION_FAILED: u8 = 4;
