use thiserror::Error;

/// Errors produced by cone construction, scalarization, space validation and
/// the orbit solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("scalarization direction must lie in the cone interior")]
    DirectionNotInterior,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "bracket cap {cap:e} exceeded while scalarizing; input too large for the configured cap"
    )]
    UnboundedInput { cap: f64 },

    #[error("malformed space: {0}")]
    MalformedSpace(String),

    #[error("cone mismatch between space and scalarization context")]
    ConeMismatch,

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid start point: {0}")]
    BadStart(String),

    #[error("rate estimation failed: {0}")]
    EstimationFailed(String),

    #[error("map is not contractive: k = {k}")]
    NotContractive { k: f64 },

    #[error("orbit diverged (non-finite iterate) at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
