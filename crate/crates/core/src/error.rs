use thiserror::Error;

/// Errors raised by the policy, reward models, oracles, environment and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("availability set is empty")]
    EmptyAvailability,

    #[error("arm index {arm} out of range for k = {k}")]
    ArmOutOfRange { arm: usize, k: usize },

    #[error("arm has never been pulled; its UCB index is undefined")]
    NeverPulled,

    #[error("feedback does not match the pulled super-arm: {0}")]
    FeedbackMismatch(String),

    #[error("feedback {value} for arm {arm} lies outside [0, 1]")]
    FeedbackOutOfRange { arm: usize, value: f64 },

    #[error("super-arm {members:?} is infeasible for availability {available:?}")]
    Infeasible {
        members: Vec<usize>,
        available: Vec<usize>,
    },

    #[error("{what}: size {size} exceeds the enumeration budget of {limit}")]
    BudgetExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("model does not declare {0}")]
    MissingDescriptor(&'static str),

    #[error("no feasible super-arm inside availability {0:?}")]
    NoFeasibleSet(Vec<usize>),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("search failed: {0}")]
    SearchFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
