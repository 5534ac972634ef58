use thiserror::Error;

/// Errors surfaced by library operations. Violations of theorem-guaranteed
/// internal steps are not errors; those panic with a witness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("context mismatch: operands live over different truncation contexts")]
    ContextMismatch,
    #[error("degree mismatch: expected degree {expected}, got {got}")]
    DegreeMismatch { expected: i32, got: i32 },
    #[error("element is not Maurer-Cartan: curvature has {terms} nonzero term(s)")]
    NotMaurerCartan { terms: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("validation failed with {0} violation(s)")]
    Invalid(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
