use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("commodity {0} has no path between its endpoints")]
    Disconnected(String),

    #[error("commodity {0} has an empty path set")]
    EmptyPathSet(String),

    #[error("malformed prefix: {0}")]
    MalformedPrefix(String),

    #[error("inconsistent fixing: {0}")]
    InconsistentFixing(String),

    #[error("oracle would enumerate {routings:e} routings (cap {cap:e}); use branch_and_bound instead")]
    OracleCap { routings: f64, cap: f64 },

    #[error("invalid probability inputs: {0}")]
    Probability(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
