use thiserror::Error;

use crate::Side;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotUnit { trace: f64 },

    #[error("effect spectrum leaves [0, 1] (eigenvalue {eigenvalue:.3e})")]
    NotAnEffect { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operators do not form a complete orthogonal basis: {0}")]
    IncompleteBasis(String),

    #[error("state is not classical on side {0}")]
    NotClassical(Side),

    #[error("could not resolve a common eigenbasis after {attempts} attempts")]
    DegeneracyUnresolved { attempts: usize },

    #[error("measured subsystem has dimension {0}; only qubits are supported")]
    UnsupportedDimension(usize),

    #[error("event space has {0} events; at most {max} supported", max = crate::lhv::MAX_AUDIT_EVENTS)]
    EventSpaceTooLarge(usize),

    #[error("frame Gram matrix is singular")]
    SingularGram,

    #[error("malformed document: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
