use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller supplied an argument outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A budgeted oracle refused a probe past its allowance.
    #[error("query budget of {limit} exhausted")]
    BudgetExhausted { limit: u64 },

    /// Exponential baselines refuse instances above their size limits.
    #[error("instance too large for exact solver: {0}")]
    TooLarge(String),

    /// A certificate precondition did not hold (e.g. a cluster left disconnected).
    #[error("certification failed: {0}")]
    Certification(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
