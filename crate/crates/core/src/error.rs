use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SolverError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("numerical blow-up at t = {t}: max |c| = {max_coeff}")]
    BlowUp { t: f64, max_coeff: f64 },

    #[error("discrete energy increased by {increase:e} at t = {t}")]
    EnergyIncrease { t: f64, increase: f64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("audit failed: {0}")]
    AuditFailed(String),
}

impl SolverError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SolverError::InvalidArgument(msg.into())
    }

    /// Process exit code used by the `solver` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            SolverError::InvalidArgument(_)
            | SolverError::Parse { .. }
            | SolverError::Io { .. } => 1,
            SolverError::BlowUp { .. }
            | SolverError::EnergyIncrease { .. }
            | SolverError::Internal(_) => 2,
            SolverError::AuditFailed(_) => 3,
        }
    }
}
