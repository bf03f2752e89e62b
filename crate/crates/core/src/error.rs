use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for lattice with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("boundary undefined: region must be nonempty and must not cover every vertex")]
    BoundaryUndefined,
    #[error("region is not contained in the enclosing volume: {0}")]
    NotContained(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shells not non-increasing (theorem hypothesis): sizes {0:?}")]
    ShellsNotMonotone(Vec<usize>),
    #[error("decay profile violates {0}")]
    Profile(#[from] crate::decay::ProfileViolation),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("time {t} outside the horizon [-{horizon}, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("Hilbert dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("unitarity drift {drift:e} exceeds tolerance {tolerance:e}; use more steps per unit time")]
    UnitarityDrift { drift: f64, tolerance: f64 },
    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate})")]
    NormNotConverged { iterations: usize, estimate: f64 },
    #[error("observable support {support:?} is not inside {allowed:?}")]
    SupportViolation { support: Vec<usize>, allowed: Vec<usize> },
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
