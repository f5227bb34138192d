use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unrecoverable data: {0}")]
    UnrecoverableData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient data: need {needed} samples, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("rank deficient normal matrix: pivot {pivot} collapsed at column {column}")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("unsupported differencing order {0} (supported: 0, 1, 2)")]
    UnsupportedOrder(usize),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("non-finite numeric input: {0}")]
    NonFinite(f64),

    #[error("impossible observation: p(o={0}) = 0")]
    ImpossibleObservation(usize),

    #[error("divergence undefined: q({0}) > 0 where the posterior is 0")]
    DivergenceUndefined(usize),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("lifecycle error: {0}")]
    Lifecycle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("invariant breach: {0}")]
    Invariant(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
