use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient index {index} on axis {axis} does not fit a grid of size {size}")]
    Alias { axis: usize, index: i64, size: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("function is not positive at grid point {index}")]
    NotPositive { index: usize },

    #[error("matrix is not positive definite at grid point {point:?}")]
    NotPositiveDefinite { point: Vec<usize> },

    #[error("unitary construction failed on slice {slice}: {reason}")]
    SliceSingular { slice: usize, reason: String },

    #[error("origin value of the stage factor is singular at reduced grid point {point:?}")]
    HatSingular { point: Vec<usize> },

    #[error("value of the factor at the origin is singular")]
    OriginSingular,

    #[error("invalid truncation order: {0}")]
    InvalidOrder(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("document is not Hermitian: {0}")]
    Symmetry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical pipeline, as opposed to bad input files.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositive { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::SliceSingular { .. }
                | Error::HatSingular { .. }
                | Error::OriginSingular
        )
    }
}
