use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("cone pair is oblique: max residual {max_residual:e} over {samples} samples")]
    Oblique { max_residual: f64, samples: usize },

    #[error("cone pair is not nested: inner point at distance {distance:e} from outer cone")]
    NotNested { distance: f64 },

    #[error("cone pair has no non-obliqueness certificate")]
    UncertifiedPair,

    #[error("vector is not nondecreasing at index {index}")]
    NotMonotone { index: usize },

    #[error("point failed membership check: {what} (distance {distance:e})")]
    Membership { what: String, distance: f64 },

    #[error("direction set is empty")]
    EmptyDirections,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bisection could not bracket the target error {target} on [{lo}, {hi}]")]
    NonBracketing { lo: f64, hi: f64, target: f64 },

    #[error("rejection sampler stalled after {attempts} attempts")]
    AcceptanceStall { attempts: usize },

    #[error("prior construction failed: {0}")]
    Prior(String),

    #[error("moment estimate {moment} is below 1 beyond noise (stderr {stderr:e})")]
    MomentBelowOne { moment: f64, stderr: f64 },

    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by user input rather than by a numerical routine.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Json(_))
    }
}
