//! Library side of the `sds` command-line front end: experiment config
//! parsing and the command implementations.
//!
//! Exit-code contract: configuration and I/O problems exit 2, a failed
//! bound or cost assertion exits 1, success exits 0.

use thiserror::Error;

pub mod commands;
pub mod config;

pub use commands::{cmd_cosine, cmd_init_compare, cmd_run, cmd_sweep_c, OutputFormat};
pub use config::{ConstantsBlock, DirectionsConfig, ExperimentConfig, InitConfig, SolverBlock};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Violation(_) => 1,
        }
    }
}
