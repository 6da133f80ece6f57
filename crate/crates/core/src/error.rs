use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coincident points: {0}")]
    CoincidentPoints(&'static str),

    #[error("probe lies within {distance:e} m of a singularity (need more than {required:e} m)")]
    ProbeTooClose { distance: f64, required: f64 },

    #[error("non-propagating configuration: {0}")]
    Ordering(String),

    #[error("height {height_km} km outside profile range [{min_km}, {max_km}] km")]
    OutOfRange { height_km: f64, min_km: f64, max_km: f64 },

    #[error("non-finite value at quadrature node {node}")]
    NonFinite { node: usize },

    #[error("division by zero: {0}")]
    ZeroDenominator(&'static str),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("quadrature grid is not symmetric under x -> -x")]
    AsymmetricGrid,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("profile parse error at line {line}: {reason}")]
    ProfileParse { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
