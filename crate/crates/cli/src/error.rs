use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] ostcal::Error),

    #[error("alignment rejected: relative rotation {rotation_deg:.2} deg exceeds {threshold_deg} deg, align again")]
    GuardRejected { rotation_deg: f64, threshold_deg: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) | CliError::Read { .. } => 2,
            CliError::Write { .. } => 1,
            CliError::Core(ostcal::Error::DegenerateGeometry(_)) => 3,
            CliError::Core(_) => 2,
            CliError::GuardRejected { .. } => 4,
        })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
