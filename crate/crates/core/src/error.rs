use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has no entries")]
    EmptyMatrix,

    #[error("entry buffer has length {found}, expected {expected}")]
    BufferLength { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian: max |M - M^dag| = {defect:e} exceeds {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error(
        "positivity violated at t = {time}: minimum eigenvalue {min_eigenvalue:e} below -{tolerance:e}"
    )]
    PositivityViolation {
        time: f64,
        min_eigenvalue: f64,
        tolerance: f64,
    },

    #[error("generator is not trace-free and Hermiticity preserving: {0}")]
    InvalidGenerator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{particles} particles exceed the dense limit of {max}")]
    DimensionOverflow { particles: usize, max: usize },

    #[error("{bound} violated: measured {measured:e} > bound {bound_value:e}")]
    BoundViolation {
        bound: &'static str,
        measured: f64,
        bound_value: f64,
    },

    #[error("non-positive sample {value} at index {index} cannot be fitted on a log scale")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("scenario failed at L = {l}: {source}")]
    SweepFailure { l: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
