//! Experiment runner and persistence layer on top of `netstab-core`:
//! config-driven graph generation, coupled-dynamics simulation, stability
//! reporting, and GA-based topology redesign, all fully seeded.

pub mod commands;
pub mod config;
pub mod formats;
pub mod verify;

use std::fmt;

/// Application-level error, carrying the process exit code.
#[derive(Debug)]
pub enum AppError {
    /// Bad config/input/IO — exit code 2.
    Config(String),
    /// GA initialization could not seed a feasible population — exit code 3.
    Init(String),
    /// A verification property suite failed — exit code 4.
    Verify(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Init(_) => 3,
            AppError::Verify(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "config error: {m}"),
            AppError::Init(m) => write!(f, "initialization failure: {m}"),
            AppError::Verify(m) => write!(f, "verification failure: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<netstab_core::error::Error> for AppError {
    fn from(e: netstab_core::error::Error) -> Self {
        match e {
            netstab_core::error::Error::InitializationFailure { budget } => AppError::Init(
                format!(
                    "no feasible initial chromosome within {budget} attempts; \
                     raise ga.init_attempt_budget or ga.init_flip_rate"
                ),
            ),
            other => AppError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Config(format!("io: {e}"))
    }
}

pub type AppResult<T> = Result<T, AppError>;
