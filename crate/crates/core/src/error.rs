use alloc::string::String;
use core::fmt;

/// Error type shared by all modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments was violated.
    InvalidArgument(String),
    /// The requested object does not exist (e.g. no Lyapunov certificate
    /// because the system is not Schur stable).
    Infeasible(String),
    /// Population initialization exhausted its attempt budget without
    /// finding a single feasible candidate.
    InitializationFailure { budget: usize },
    /// An operation was called in a state it cannot handle.
    InvalidState(String),
    /// The problem exceeds a hard size budget.
    TooLarge(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::InitializationFailure { budget } => write!(
                f,
                "initialization failure: no feasible candidate within {budget} attempts \
                 (raise init_attempt_budget or init_flip_rate)"
            ),
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::TooLarge(msg) => write!(f, "problem too large: {msg}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
