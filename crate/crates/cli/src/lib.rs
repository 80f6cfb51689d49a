//! Command-line front end: file formats and the subcommands behind `qdel`.
//!
//! Every command returns its standard output together with an exit code so
//! that it can be driven from tests without spawning a process.

pub mod commands;
pub mod format;

use std::path::Path;

pub use commands::{
    cmd_check, cmd_construct, cmd_rate_table, cmd_search, cmd_simulate, cmd_vt, SimulateMode,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

/// Largest `sum_m |X^(m)|` accepted for simulation.
pub const SIMULATION_GUARD: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse(_) => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Guard(_) => EXIT_GUARD,
        }
    }
}

impl From<qdel::Error> for CliError {
    fn from(e: qdel::Error) -> Self {
        match e {
            qdel::Error::SizeGuard(_) => CliError::Guard(e.to_string()),
            qdel::Error::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// Standard output of a command and the exit code it asks for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    pub fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: EXIT_OK,
        }
    }
}
