use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("duplicate template rows {first} and {second}")]
    DuplicateTemplateRow { first: usize, second: usize },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("statement is not sequential")]
    NotSequential,

    #[error("path expansion would produce {count} paths (limit {limit})")]
    PathExplosion { count: String, limit: u64 },

    #[error("invalid cut-set: cycle {0:?} is not broken")]
    InvalidCutset(Vec<String>),

    #[error("query threshold must be below +inf")]
    ThresholdIsTop,

    #[error("SMT backend failure: {0}")]
    Backend(String),

    #[error("internal error: {0}")]
    Internal(String),
}
