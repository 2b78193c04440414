use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid contraction pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("symmetry violated: {what} (residual {residual:e})")]
    Symmetry { what: String, residual: f64 },

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("unknown catalog entry `{0}`")]
    UnknownMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point outside chart: {0}")]
    OutsideChart(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported dimension {n}: {reason}")]
    UnsupportedDimension { n: usize, reason: &'static str },

    #[error("metric must have unit volume (found {volume}); rescale it first")]
    NotUnitVolume { volume: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}
