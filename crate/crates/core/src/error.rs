use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("abscissae not sorted: c[{index}] < c[{prev}]")]
    UnsortedAbscissae { index: usize, prev: usize },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("explicit and implicit abscissae differ at stage {0}")]
    InconsistentAbscissae(usize),

    #[error("forcing polynomial argument {0} outside [0, 1]")]
    TauOutOfRange(f64),

    #[error("stage index {index} out of range 2..={stages}")]
    StageOutOfRange { index: usize, stages: usize },

    #[error("unknown method `{name}`; available: {available}")]
    UnknownMethod { name: String, available: String },

    #[error("method `{0}` has a solve-coupled stage, which is not supported")]
    SolveCoupled(String),

    #[error("Newton iteration failed at stage {stage}: {reason}")]
    NewtonFailure { stage: usize, reason: String },

    #[error("stability function has a pole at z^I = {0}")]
    Pole(num_complex::Complex64),

    #[error("singular iteration matrix")]
    SingularMatrix,

    #[error("GARK system too large: {0} fast stages (limit 10000)")]
    TooLarge(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
