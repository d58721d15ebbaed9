use thiserror::Error;

/// Errors raised by the model-selection engine and its backends.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("resource limit exceeded: {what} requires {required}, limit is {limit}")]
    ResourceLimit {
        what: String,
        required: u128,
        limit: u128,
    },

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("insufficient replicates: need at least {needed}, got {got}")]
    InsufficientReplicates { needed: usize, got: usize },

    #[error("posterior variance undefined: shape a_N = {shape} must exceed 1")]
    VarianceUndefined { shape: f64 },

    #[error("singular limit law: {0}")]
    SingularLaw(String),

    #[error("degenerate limit law: {0}")]
    DegenerateLaw(String),

    #[error("degenerate contrasts: {0}")]
    DegenerateContrast(String),

    #[error("singular moment matrix: {0}")]
    SingularMoment(String),

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Strip any replicate annotations and return the innermost error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
