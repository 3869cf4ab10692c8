use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric: {context} entry ({row},{col}) differs from ({col},{row})")]
    Asymmetric {
        context: String,
        row: usize,
        col: usize,
    },

    #[error("transformation matrix is singular")]
    SingularTransform,

    #[error("block is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("symmetric eigensolver did not converge")]
    EigenNoConvergence,

    #[error("invalid reformulation: {0}")]
    InvalidReform(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance has no usable structure: {0}")]
    Unstructured(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("not in span: {0}")]
    NotInSpan(String),

    #[error("invalid facial reduction step {step}: {reason}")]
    InvalidFrStep { step: usize, reason: String },

    #[error("claim violated: {0}")]
    ClaimViolated(String),

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("unsupported file version {0}")]
    Version(u32),

    #[error("value cannot be rendered as a terminating decimal: {0}")]
    Precision(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
