use thiserror::Error;

/// Errors produced by the spectral-element core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point lies outside the closed domain an operation is defined on.
    #[error("point ({x}, {y}) lies outside the {domain}")]
    Domain {
        domain: &'static str,
        x: f64,
        y: f64,
    },

    #[error("degenerate triangle: signed area factor F = {f:e} is below tolerance")]
    DegenerateTriangle { f: f64 },

    #[error("triangle is clockwise (F = {f:e}); vertices must be ordered counterclockwise")]
    Orientation { f: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    /// The singular table does not reach every `(p, q)` an operation needs.
    #[error(
        "singular table with n_max = {available} is too small; n_max >= {required} is required"
    )]
    Coverage { required: usize, available: usize },

    #[error("oracle error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Accuracy { tolerance: f64, estimate: f64 },

    #[error("reduced system matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("problem is ill-posed: {0}")]
    IllPosed(String),

    #[error("non-finite value produced while evaluating {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
