use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the estimation core.
///
/// All variants other than [`Error::Benchmark`] are invalid-argument errors:
/// the caller handed over something that violates a documented precondition.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dataset contains no interactions")]
    EmptyDataset,

    #[error("individual {index} takes part in no interaction; its maximum-likelihood strength is undefined")]
    IsolatedIndividual { index: usize },

    #[error("benchmark cell {cell}, instance {instance}: {source}")]
    Benchmark {
        cell: usize,
        instance: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
