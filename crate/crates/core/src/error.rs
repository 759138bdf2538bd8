use thiserror::Error;

/// Errors produced by the simulator, the estimators and the file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero bandwidth: range unobservable")]
    ZeroBandwidth,
    #[error("spatial aliasing: |omega_angle| = {0} is outside the visible region")]
    SpatialAliasing(f64),
    #[error("invalid angle of arrival {0} deg: must lie strictly inside (-90, 90)")]
    InvalidAngle(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),
    #[error("non-finite value in input matrix")]
    NonFinite,
    #[error("no signal to refine")]
    NoSignal,
    #[error("insufficient rank: covariance rank {rank} < {required} sources")]
    InsufficientRank { rank: usize, required: usize },
    #[error("no hits: RMSE undefined")]
    NoHits,
    #[error("duplicate signature entry at ({0}, {1})")]
    DuplicateEntry(f64, f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported {kind} version {version}")]
    UnsupportedVersion { kind: &'static str, version: u32 },
    #[error("eigendecomposition failed")]
    Eigen,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
