//! Experiment drivers behind the `dlab` binary.

pub mod commands;
pub mod config;
pub mod plot;

use thiserror::Error;

use dlab_core::dissipative::DissipativeError;
use dlab_core::io::IoError;
use dlab_core::selection::SelectionError;
use dlab_core::solver::SolverError;
use dlab_core::trajectory::TrajectoryError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Dissipative(#[from] DissipativeError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

impl CliError {
    /// 2 for usage, config and input errors, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 2,
            _ => 1,
        }
    }
}
