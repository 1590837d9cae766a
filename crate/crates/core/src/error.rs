use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("subsystem index {index} out of range for a space with {len} factors")]
    SiteOutOfRange { index: usize, len: usize },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid label {label:?}: {reason}")]
    BadLabel { label: String, reason: String },

    #[error("step size underflow at t = {t:e} s (h = {h:e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integration failed at t = {t:e} s: {reason}")]
    Integration { t: f64, reason: String },

    #[error("eigendecomposition did not converge")]
    Eigen,

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_scenario(self, scenario: impl Into<String>) -> Self {
        Error::Scenario { scenario: scenario.into(), source: Box::new(self) }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepUnderflow { .. } | Error::Integration { .. } | Error::Eigen => true,
            Error::Scenario { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
