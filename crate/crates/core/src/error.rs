use thiserror::Error;

use crate::qpsolver::QpStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("group delay {delta} must be smaller than the channel order {order}")]
    DelayOutOfRange { delta: usize, order: usize },

    #[error("every channel tap falls below the threshold {0:e}")]
    EmptyChannel(f64),

    #[error("channel matrix of subcarrier {0} is rank deficient")]
    RankDeficient(usize),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("symbol {0} is not a point of the {1} constellation")]
    SymbolNotInConstellation(String, String),

    #[error("QP solver stopped with status {status:?} at block {block}")]
    QpFailure { status: QpStatus, block: usize },

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
