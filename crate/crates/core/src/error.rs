use thiserror::Error;

/// Errors raised by the discrimination toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not an isometry (max deviation {0:e})")]
    NotIsometry(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("channel `{channel}`: Kraus operator {index} is numerically zero")]
    ZeroKrausOperator { channel: String, index: usize },

    #[error("channel `{channel}` violates completeness (defect {defect:e})")]
    Incomplete { channel: String, defect: f64 },

    #[error("need at least {needed} items, got {found}")]
    TooFew { needed: usize, found: usize },

    #[error("excluding channel {0} leaves no channels")]
    ExclusionEmptiesSet(usize),

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("tensor power dimension {dim} exceeds guard {guard}")]
    GuardExceeded { dim: usize, guard: usize },

    #[error("Schmidt coefficient {index} is not positive ({value})")]
    NonPositiveSchmidt { index: usize, value: f64 },

    #[error("Schmidt coefficients are not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("support of state {contained} lies inside support of state {container} (residual {residual:e})")]
    SupportContained {
        contained: usize,
        container: usize,
        residual: f64,
    },

    #[error("channel {contained} has support inside channel {container}'s support (residual {residual:e})")]
    Infeasible {
        contained: usize,
        container: usize,
        residual: f64,
    },

    #[error("{0} copies is too many to enumerate outcome patterns")]
    TooManyCopies(usize),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
