use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments does not hold.
    InvalidInput(String),
    /// A factorization failed or a non-finite value appeared.
    Numerical {
        message: String,
        iteration: Option<usize>,
    },
    /// The smoothing parameter increased between two iterations.
    ScheduleViolation {
        iteration: usize,
        beta: f64,
        beta_next: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical {
            message: msg.into(),
            iteration: None,
        }
    }

    /// Attach an iteration index to a numerical error that lacks one.
    pub fn at_iteration(self, k: usize) -> Self {
        match self {
            Error::Numerical {
                message,
                iteration: None,
            } => Error::Numerical {
                message,
                iteration: Some(k),
            },
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Numerical {
                message,
                iteration: Some(k),
            } => write!(f, "numerical failure at iteration {k}: {message}"),
            Error::Numerical {
                message,
                iteration: None,
            } => write!(f, "numerical failure: {message}"),
            Error::ScheduleViolation {
                iteration,
                beta,
                beta_next,
            } => write!(
                f,
                "smoothing schedule must be nonincreasing: beta_{iteration} = {beta} < beta_{} = {beta_next}",
                iteration + 1
            ),
        }
    }
}

impl core::error::Error for Error {}
