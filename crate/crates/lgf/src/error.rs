use thiserror::Error;

/// Every failure the toolkit can report. The CLI maps these onto exit codes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid dimension {0}: need d >= 2")]
    InvalidDimension(usize),
    #[error("validation: {0}")]
    Validation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("memory budget exceeded at n={n}: need {needed} bytes, budget {budget}")]
    Resource { n: usize, needed: u64, budget: u64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("leading coefficient vanishes at n={0}")]
    SingularPoint(i64),
    #[error("no applicable recurrence at n={n}, point {point:?}")]
    NoApplicableRecurrence { n: usize, point: Vec<i64> },
    #[error("guessed recurrences contradict counted data at n={n}, point {point:?}")]
    GuessInconsistency { n: usize, point: Vec<i64> },
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Process exit code: 2 validation, 3 resource, 4 insufficient data, 5 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidDimension(_)
            | Error::Validation(_)
            | Error::Parse { .. }
            | Error::Unsupported(_) => 2,
            Error::Resource { .. } => 3,
            Error::InsufficientData(_) => 4,
            Error::Verification(_)
            | Error::SingularPoint(_)
            | Error::NoApplicableRecurrence { .. }
            | Error::GuessInconsistency { .. }
            | Error::PrecisionLoss(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
