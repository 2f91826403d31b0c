use thiserror::Error;

/// Errors raised by the polyflow algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree {0} is below the minimum of 2")]
    DegreeTooSmall(usize),

    #[error("degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("roots {a} and {b} are closer than the separation tolerance {tol:e}")]
    DuplicateRoot { a: f64, b: f64, tol: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("leading coefficient must be exactly 1, got {0}")]
    NotMonic(f64),

    #[error("malformed polynomial: {0}")]
    Malformed(String),

    #[error("index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("singular evolution: {0}")]
    SingularEvolution(String),

    #[error("step budget of {0} exceeded")]
    MaxStepsExceeded(usize),

    #[error("constant coefficient {psq:e} is not within {tol:e} of zero")]
    NotAtZero { psq: f64, tol: f64 },

    #[error("reduction trace is incomplete: {0}")]
    IncompleteTrace(String),

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("three-real-root condition violated: (R0/2)^2 = {lhs:e} >= (d/3)^3 = {rhs:e}")]
    DiscriminantViolation { lhs: f64, rhs: f64 },

    #[error("radicand {0:e} is negative at the starting point")]
    RadicandNegative(f64),

    #[error("flow contains no turning point")]
    NoTurningPoint,

    #[error("elliptic parameter {0} outside [0, 1]")]
    ModulusOutOfRange(f64),

    #[error("inconsistent initial state: {0}")]
    InconsistentInit(String),

    #[error("integration step failed at tau = {0}")]
    StepFailure(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
