use crate::mfk::NestingReport;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Array or matrix dimensions do not line up.
    #[error("input shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// A caller-supplied argument is outside its allowed range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numeric precondition failed (non-positive theta, singular trend, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Cholesky factorization of the correlation matrix failed even after
    /// nugget escalation. Carries the last nugget that was attempted.
    #[error("correlation matrix is not positive definite (last nugget tried: {nugget:e})")]
    IllConditioned { nugget: f64 },

    /// Every restart of the hyperparameter search hit a factorization failure.
    #[error("hyperparameter search failed: no restart produced a usable factorization")]
    Unfittable,

    /// Fidelity designs are not nested and strict nesting is enabled.
    #[error("nesting violated: {0}")]
    Nesting(NestingReport),

    /// A fidelity level has too few points to fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Two identical input rows carry different responses and no nugget is
    /// configured to absorb the contradiction.
    #[error("duplicate input rows {row_a} and {row_b} have different responses; set a nugget > 0")]
    DuplicateInputs { row_a: usize, row_b: usize },

    /// A CSV row failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// A file is structurally wrong (missing columns, mixed fidelity, ...).
    #[error("schema error: {0}")]
    Schema(String),

    /// The response carries no usable signal (e.g. zero variance for PLS).
    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    /// A point lies outside the validity range of a formula.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A model file could not be understood.
    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Schema(format!("csv error: {other:?}")),
        }
    }
}

impl Error {
    pub(crate) fn shape(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            expected: expected.into(),
            got: got.into(),
        }
    }
}
