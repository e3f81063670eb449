use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation points (or worker lambdas) contain a duplicate.
    #[error("evaluation points must be pairwise distinct")]
    DistinctnessViolation,

    /// An index or count parameter is outside its admissible range.
    #[error("index out of range: {0}")]
    IndexViolation(String),

    /// Matrix dimensions do not conform.
    #[error("shape violation: {0}")]
    ShapeViolation(String),

    /// A linear system is rank deficient beyond the solve tolerance.
    #[error("rank-deficient system")]
    RankDeficient,

    /// The requested epsilon is outside the admissible range of the
    /// construction.
    #[error("epsilon outside admissible range: {0}")]
    EpsilonRange(String),

    /// A decoder received fewer worker results than its threshold.
    #[error("insufficient worker results: got {got}, need {need}")]
    InsufficientResults { got: usize, need: usize },

    /// A parameter set failed validation.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file had an unexpected format.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
