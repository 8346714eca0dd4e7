use thiserror::Error;

/// Errors raised by the engines and the scenario front-end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: total dimension {requested} > limit {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("degenerate set-up table `{table}`: columns {first} and {second} coincide on every factor")]
    DegenerateTable {
        table: String,
        first: String,
        second: String,
    },

    #[error("ESP precondition failed: {0}")]
    EspPrecondition(String),

    #[error("insufficient set-ups: credences of {unconstrained:?} are not determined")]
    InsufficientSetups { unconstrained: Vec<String> },

    #[error("contradiction: `{first}` conflicts with `{second}`")]
    Contradiction { first: String, second: String },

    #[error("unsupported weights: {0}")]
    UnsupportedWeights(String),

    #[error("erasure infeasible: spectral distance {distance:e} exceeds tolerance {tol:e}")]
    Infeasible { distance: f64, tol: f64 },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("unknown case `{id}`; available: {}", available.join(", "))]
    Lookup { id: String, available: Vec<String> },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn layout(msg: impl Into<String>) -> Self {
        Error::Layout(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Process exit status for this error class: 3 for capacity, 2 for every
    /// other input or engine error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity { .. } => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
