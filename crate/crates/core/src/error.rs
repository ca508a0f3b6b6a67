use thiserror::Error;

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    /// A value lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("arity mismatch: expected {expected} input(s), got {got}")]
    Arity { expected: usize, got: usize },

    #[error("input index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },

    /// `position` is a 1-based column into the source text.
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("range error at position {position}: {atom} does not map I to I")]
    Range { position: usize, atom: String },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    /// Whether the error was caused by user input rather than by exhausting a budget.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, CoreError::ResourceLimit(_))
    }
}
