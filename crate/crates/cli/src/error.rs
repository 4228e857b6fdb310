use std::path::{Path, PathBuf};

use beam_core::BeamError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("solver failure: {0}")]
    Solver(#[from] BeamError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("verification failed: {}", .0.join(", "))]
    VerificationFailed(Vec<String>),

    #[error("every sweep run failed ({0} runs)")]
    SweepFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerificationFailed(_) => 1,
            CliError::InvalidScenario(_) => 2,
            CliError::Solver(_) | CliError::SweepFailed(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
