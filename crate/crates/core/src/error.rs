use thiserror::Error;

/// Errors produced by the operator laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("zero s-number at index {index} inside the fit window")]
    ZeroInWindow { index: usize },
    #[error("fit window holds {points} points, at least {required} required")]
    InsufficientData { points: usize, required: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("I + S is numerically singular (smallest singular value {0:e})")]
    SingularPerturbation(f64),
    #[error("H is not Hermitian positive semidefinite: {0}")]
    InvalidH(String),
    #[error("argument out of supported range: {0}")]
    OutOfRange(String),
    #[error("root finding failed for j_({n},{k}): {reason}")]
    RootFindFailure { n: u32, k: u32, reason: String },
    #[error("harmonic or Fourier-Bessel mode outside the basis: {0}")]
    OutOfBasis(String),
    #[error("invalid Schmidt expansion: {0}")]
    InvalidSchmidtSpec(String),
    #[error("LAPACK failure: {0}")]
    Lapack(String),
    #[error("eigensolver failed at N = {dim}: {source}")]
    AtDimension {
        dim: usize,
        #[source]
        source: Box<LabError>,
    },
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<ndarray_linalg::error::LinalgError> for LabError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        LabError::Lapack(e.to_string())
    }
}
