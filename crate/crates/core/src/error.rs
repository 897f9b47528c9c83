use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// No feasible hub label exists for a group (0-based index).
    #[error("infeasible instance: group {group} contains no leader node")]
    Infeasible { group: usize },

    #[error("enumeration over {n} nodes exceeds the cap of {cap} (2^n outcomes)")]
    EnumerationCap { n: usize, cap: usize },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// The innermost error, looking through replicate wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
