use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = QssError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QssError {
    /// Unknown, duplicated or overlapping qubit labels.
    #[error("labeling error: {0}")]
    Labeling(String),

    /// An operation would produce a block wider than the configured qubit cap.
    #[error("capacity error: {qubits} qubits exceeds cap of {cap} ({context})")]
    Capacity { qubits: usize, cap: usize, context: String },

    /// Input fails a numerical contract (non-unitary gate, non-Hermitian state, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The configured attack cannot be carried out under the channel rules.
    #[error("strategy infeasible: {0}")]
    StrategyInfeasible(String),

    #[error("protocol usage error: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl QssError {
    pub(crate) fn labeling(msg: impl Into<String>) -> Self {
        QssError::Labeling(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        QssError::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        QssError::Domain(msg.into())
    }
}
