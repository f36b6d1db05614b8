use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(
        "truncation: population {population:.3e} in the top {levels} Fock levels exceeds \
         tolerance {tolerance:.3e} (raise fock_cutoff)"
    )]
    Truncation {
        population: f64,
        levels: usize,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |H - H†| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("Poisson series needs {needed}+ terms, ceiling is {ceiling}")]
    PlanOverflow { needed: usize, ceiling: usize },

    #[error("integrator step {step:.3e} is below the 1e-9 floor")]
    StepSizeUnderflow { step: f64 },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("case `{case}`: {source}")]
    InCase {
        case: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Attach a sweep-case label.
    pub fn in_case(self, case: impl Into<String>) -> Self {
        Error::InCase {
            case: case.into(),
            source: Box::new(self),
        }
    }
}
