use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("density matrix trace is {trace}, expected 1")]
    NonUnitTrace { trace: f64 },

    #[error("integration failure at step {step}: trace drifted by {drift:e}")]
    IntegrationFailure { step: usize, drift: f64 },

    #[error(
        "singular design matrix at step {step}: singular values {singular_values:?} \
         (initial states not diverse enough, or Bloch vectors collapsed)"
    )]
    SingularSystem {
        step: usize,
        singular_values: Vec<f64>,
    },

    #[error("Z-type amplitudes unobservable at step {step}: no transverse coupling to the measured axis")]
    UnobservableZ { step: usize },

    #[error("nonlinear solve did not converge at step {step}: residual {residual:e}")]
    NoConvergence { step: usize, residual: f64 },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("record has no calibration voltages; cannot rescale to z")]
    MissingCalibration,

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("outside the dispersive regime: {0}")]
    OutOfRegime(String),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid reconstruction input: {0}")]
    InvalidInput(String),

    #[error("invalid Pauli label {0:?}")]
    InvalidLabel(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("{context}: {source}")]
    Scenario {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI, one per error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidLabel(_) | Error::InvalidFilter(_) => 2,
            Error::UnknownScenario(_) => 3,
            Error::Io(_) | Error::Json(_) => 4,
            Error::Scenario { source, .. } => source.exit_code(),
            _ => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
