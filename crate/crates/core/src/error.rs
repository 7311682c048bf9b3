use std::fmt;

use crate::Rational;

/// Coarse grouping of errors, used by the command line for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Parse,
    Precondition,
    Engine,
    Verification,
}

impl ErrorFamily {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorFamily::Parse => 2,
            ErrorFamily::Precondition => 3,
            ErrorFamily::Engine => 4,
            ErrorFamily::Verification => 5,
        }
    }
}

impl fmt::Display for ErrorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorFamily::Parse => "parse",
            ErrorFamily::Precondition => "precondition",
            ErrorFamily::Engine => "engine",
            ErrorFamily::Verification => "verification",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("missing value for variable `{0}`")]
    MissingVariable(String),

    #[error("polynomial is not divisible by `{var}`")]
    NotDivisible { var: String },

    #[error("derivation `{label}` is not nilpotent within cap {cap}")]
    CapExceeded { label: String, cap: usize },

    #[error("variable sets do not match ({left} vs {right})")]
    VariableMismatch { left: usize, right: usize },

    #[error("suspension function must be non-constant")]
    ConstantSuspension,

    #[error("variable `{0}` is already used in the tower")]
    VariableClash(String),

    #[error("point is off the variety: relation of level {level} evaluates to {residual}")]
    OffVariety { level: usize, residual: Rational },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("value {value} is outside the interior of the range {range}")]
    OutOfRange { value: Rational, range: String },

    #[error("no rational preimage found for value {value} within {tries} candidates")]
    NoRationalPreimage { value: Rational, tries: usize },

    #[error("unsupported suspension function: {0}")]
    UnsupportedFunction(String),

    #[error("unsupported range descriptor: {0}")]
    UnsupportedRange(String),

    #[error("component-mismatch: {0}")]
    ComponentMismatch(String),

    #[error("no flexible direction moves f at the point")]
    NoFlexibleDirection,

    #[error("generic parameter search exhausted after {0} candidates")]
    GenericExhausted(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mock geometry cannot realize: {0}")]
    MockUnrealizable(String),

    #[error("invalid file: {0}")]
    Format(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("during {stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        match self {
            Error::Syntax { .. } | Error::UnknownVariable(_) | Error::Format(_) | Error::Io(_) => {
                ErrorFamily::Parse
            }
            Error::MissingVariable(_)
            | Error::ConstantSuspension
            | Error::VariableClash(_)
            | Error::OffVariety { .. }
            | Error::Degenerate(_)
            | Error::OutOfRange { .. }
            | Error::ComponentMismatch(_)
            | Error::UnsupportedFunction(_)
            | Error::UnsupportedRange(_)
            | Error::VariableMismatch { .. }
            | Error::Precondition(_) => ErrorFamily::Precondition,
            Error::NotDivisible { .. }
            | Error::CapExceeded { .. }
            | Error::NoRationalPreimage { .. }
            | Error::NoFlexibleDirection
            | Error::GenericExhausted(_)
            | Error::MockUnrealizable(_) => ErrorFamily::Engine,
            Error::Verification(_) => ErrorFamily::Verification,
            Error::Stage { source, .. } => source.family(),
        }
    }

    /// Attributes the error to a pipeline stage unless it already carries one.
    pub fn at_stage(self, stage: impl Into<String>) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage: stage.into(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
