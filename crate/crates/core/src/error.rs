use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not an effect (eigenvalues must lie in [0, 1], violation {0:.3e})")]
    InvalidEffect(f64),

    #[error("operator is not a projection (|M^2 - M| = {0:.3e})")]
    NotProjective(f64),

    #[error("Kraus operators are not unital (residual {0:.3e})")]
    NonUnital(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
