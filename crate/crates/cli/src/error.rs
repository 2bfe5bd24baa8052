use thiserror::Error;

/// Problems with user-supplied input files. All of these map to exit code 2.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: {message}")]
    Validation { line: u64, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] multirank_core::Error),
}
