use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violates a numerical contract (norm, hermiticity, positivity).
    #[error("validation error: {0}")]
    Validation(String),

    /// The state reached the lattice edge, so a shift would drop amplitude.
    #[error("lattice overflow: {0}")]
    Overflow(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Configuration failed validation; `key` names the offending field.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },
}

pub type Result<T, E = WalkError> = std::result::Result<T, E>;

impl WalkError {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        WalkError::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
