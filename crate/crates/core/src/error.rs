use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("closed-form accuracy requires a bias-free classifier (bias = {0})")]
    NonzeroBias(f64),

    #[error("closed-form robust accuracy does not support box-constrained threat models")]
    BoxUnsupported,

    #[error("theorem hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("training diverged at step {step}: non-finite weight at index {index}")]
    Divergence { step: usize, index: usize },

    #[error(
        "lambda bracket [{lambda_lo:e}, {lambda_hi:e}] does not enclose unit norm \
         (norms {norm_lo:.4} .. {norm_hi:.4}) after {iterations} bisection steps"
    )]
    BracketFailure {
        lambda_lo: f64,
        lambda_hi: f64,
        norm_lo: f64,
        norm_hi: f64,
        iterations: usize,
    },

    #[error("IDX: wrong magic number {0:#010x} (expected 0x00000801 or 0x00000803)")]
    IdxMagic(u32),

    #[error("IDX: truncated input ({needed} bytes needed, {available} available)")]
    IdxTruncated { needed: usize, available: usize },

    #[error("IDX: dimensions {0:?} overflow the addressable size")]
    IdxOverflow(Vec<u32>),

    #[error("IDX: {0}")]
    IdxShape(String),

    #[error("no samples of digit {0} after filtering")]
    EmptyClass(u8),

    #[error("report rows must share one column set: {0}")]
    ReportColumns(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed weight grid: {0}")]
    WeightGrid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
