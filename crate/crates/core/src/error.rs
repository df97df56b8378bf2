use thiserror::Error;

/// Errors produced by the calibration library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-range input (empty clouds, mismatched lengths, bad options).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The homogeneous depth of a projected point is not positive.
    #[error("point lies behind the viewpoint (depth {0})")]
    BehindViewpoint(f64),

    /// The geometry does not constrain the unknowns (rank-deficient system, collinear cloud).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
