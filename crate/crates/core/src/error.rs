//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field extent mismatch: expected {expected} values, got {actual}")]
    ExtentMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("cylinder outside the analysis region: {0}")]
    OutsideRegion(String),

    #[error("under-resolved radius {radius} (need at least {min_radius} = {cells} grid spacings)")]
    UnderResolved { radius: f64, min_radius: f64, cells: f64 },

    #[error("time window holds {found} slices, at least {required} required")]
    TooFewSlices { found: usize, required: usize },

    #[error("pressure field required but absent")]
    PressureRequired,

    #[error("malformed flow file: {0}")]
    MalformedHeader(String),

    #[error("unsupported flow file version: {0}")]
    UnsupportedVersion(String),

    #[error("payload shorter than header promises ({actual} of {expected} bytes)")]
    PayloadShort { expected: usize, actual: usize },

    #[error("payload longer than header promises ({actual} of {expected} bytes)")]
    PayloadLong { expected: usize, actual: usize },

    #[error("conjugate gradient did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("no samples: {0}")]
    NoSamples(String),

    #[error("degenerate right-hand side for {check} but left-hand side {lhs:e} exceeds tolerance {tol:e}")]
    DegenerateViolation { check: String, lhs: f64, tol: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
