use serde::Serialize;
use thiserror::Error;

use polyflow_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Schema(String),

    #[error("unknown suite '{0}'; expected one of vieta, invariants, theorem24, euler-shift, trig, elliptic, dynamics")]
    UnknownSuite(String),

    /// The instance is valid input but outside what the solvers handle
    /// (complex or repeated roots, inconsistent initial data, ...).
    #[error("{message}")]
    OutOfScope { kind: &'static str, message: String },

    /// `output` holds the full report.
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize, output: String },

    /// Some items of a batch failed; `output` still holds the full result.
    #[error("one or more batch items failed")]
    PartialBatch { output: String, code: u8 },
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) | Self::Schema(_) | Self::UnknownSuite(_) => 1,
            Self::OutOfScope { .. } | Self::ChecksFailed { .. } => 2,
            Self::PartialBatch { code, .. } => *code,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io(_) => "io",
            Self::Schema(_) => "schema",
            Self::UnknownSuite(_) => "unknown_suite",
            Self::OutOfScope { kind, .. } => kind,
            Self::ChecksFailed { .. } => "checks_failed",
            Self::PartialBatch { .. } => "partial_batch",
        }
    }

    /// Data still owed to stdout despite the failure.
    pub fn output(&self) -> Option<&str> {
        match self {
            Self::ChecksFailed { output, .. } | Self::PartialBatch { output, .. } => Some(output),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorReport {
            error: ErrorBody {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("error report serializes")
    }

    pub fn out_of_scope(kind: &'static str, message: impl Into<String>) -> Self {
        Self::OutOfScope {
            kind,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Schema(format!("invalid JSON: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        use CoreError::*;
        let message = e.to_string();
        match e {
            DegreeTooSmall(_) | DegreeTooLarge { .. } | NonFinite(_) | NotMonic(_) | Malformed(_)
            | IndexOutOfRange { .. } | ModulusOutOfRange(_) => Self::Schema(message),
            DuplicateRoot { .. } => Self::out_of_scope("repeated_roots", message),
            DiscriminantViolation { .. } | RadicandNegative(_) => {
                Self::out_of_scope("complex_roots", message)
            }
            InconsistentInit(_) => Self::out_of_scope("inconsistent_init", message),
            _ => Self::out_of_scope("numerical", message),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
