use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (dim {dim})")]
    EigNoConvergence { dim: usize, sweeps: usize },

    #[error("matrix dimension {dim} exceeds eigensolver cap {cap}")]
    EigTooLarge { dim: usize, cap: usize },

    #[error("matrix is singular to working tolerance (pivot {pivot:e} at column {col})")]
    Singular { col: usize, pivot: f64 },

    #[error("vanishing Sherman-Morrison-Woodbury denominator at probe {probe} ({value:e})")]
    DegenerateProbe { probe: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("estimated row {row} is numerically zero")]
    ZeroRow { row: usize },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
