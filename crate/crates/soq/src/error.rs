use std::path::PathBuf;

use serde::Serialize;

/// Everything the CLI and service can fail with.
#[derive(Debug, thiserror::Error)]
pub enum SoqError {
    #[error(transparent)]
    Core(#[from] soq_core::Error),
    #[error("stage {stage}: {source}")]
    Staged { stage: usize, source: soq_core::Error },
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("{0}")]
    MissingGroundTruth(String),
}

/// Machine-readable error payload, `{"code", "message"}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl SoqError {
    pub fn staged(stage: usize) -> impl FnOnce(soq_core::Error) -> SoqError {
        move |source| SoqError::Staged { stage, source }
    }

    pub fn code(&self) -> &'static str {
        match self {
            SoqError::Core(e) | SoqError::Staged { source: e, .. } => e.code(),
            SoqError::Read { .. } => "ReadFailed",
            SoqError::Write { .. } => "WriteFailed",
            SoqError::Bind { .. } => "PortInUse",
            SoqError::MissingGroundTruth(_) => "MissingGroundTruth",
        }
    }

    /// 2 for bad input, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            SoqError::Core(e) | SoqError::Staged { source: e, .. } if e.is_input_error() => 2,
            SoqError::Read { .. } | SoqError::MissingGroundTruth(_) => 2,
            _ => 3,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code().to_string(),
            message: self.to_string(),
        }
    }
}

pub type Result<T, E = SoqError> = std::result::Result<T, E>;
