use thiserror::Error;

/// Errors produced by the certification toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix does not have full column rank (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("Bloch vector norm {0} exceeds 1")]
    BlochOutOfBall(f64),

    #[error("operation requires a qubit (d = 2), got d = {0}")]
    NotQubit(usize),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid statistics: {0}")]
    InvalidStatistics(String),

    #[error("statistics index mismatch: {0}")]
    IndexMismatch(String),

    #[error("missing statistics entry: {0}")]
    MissingEntry(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("validity condition violated at eps = {eps}: gamma_inv_norm * O_k(eps) = {ratio} >= 1")]
    ValidityExceeded { eps: f64, ratio: f64 },

    #[error("target Bloch vectors span fewer than two dimensions; self-testing is not applicable")]
    DegenerateConfiguration,

    #[error("Bloch vector of ({x}, {a}) is not in the span of the chosen subset (residual {residual:e})")]
    OutsideSpan { x: usize, a: usize, residual: f64 },

    #[error("not a rotation: {0}")]
    NotRotation(String),

    #[error("empty input")]
    EmptyInput,

    #[error("orthogonal states have no unique intermediate state")]
    OrthogonalPair,

    #[error("unknown catalog scenario '{0}'")]
    UnknownScenario(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
