use thiserror::Error;

/// Errors raised while reading or validating input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl InputError {
    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        InputError::Syntax {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        InputError::Invalid(msg.into())
    }
}

/// Errors raised by solvers and geometry routines when a precondition fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("solver needs k = {expected}, instance has k = {found}")]
    WrongK { expected: usize, found: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}
