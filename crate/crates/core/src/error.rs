use thiserror::Error;

/// Errors raised by the algebra routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("structure matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension must be positive")]
    EmptyAlgebra,
    #[error("basis change is not natural: |f_{i}*f_{j}| = {magnitude:e}")]
    NotNatural { i: usize, j: usize, magnitude: f64 },
    #[error("matrix is singular at the working tolerance")]
    Singular,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("operation requires dimension {expected}, algebra has dimension {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("algebra is not nilpotent")]
    NotNilpotent,
    #[error("power sequence did not vanish within cap {cap}")]
    CapExceeded { cap: usize },
    #[error("leading minor of order {order} is singular")]
    SingularMinor { order: usize },
    #[error("tolerance must be positive and finite")]
    BadTolerance,
}

pub type Result<T> = std::result::Result<T, Error>;
