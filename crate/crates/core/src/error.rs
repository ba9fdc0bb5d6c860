use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    /// An input failed a structural or numerical precondition.
    #[error("validation failed: {check} (magnitude {magnitude:.3e})")]
    Validation { check: String, magnitude: f64 },

    #[error("positivity violated: eigenvalue {eigenvalue:.3e} below -{tolerance:.1e}")]
    Positivity { eigenvalue: f64, tolerance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("size ceiling exceeded: dimension {dim} > {ceiling}")]
    Size { dim: usize, ceiling: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("label error: {0}")]
    Label(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl LabError {
    pub(crate) fn validation(check: impl Into<String>, magnitude: f64) -> Self {
        Self::Validation {
            check: check.into(),
            magnitude,
        }
    }

    /// Process exit status for this error class: 2 for configuration or
    /// domain problems, 3 for the brute-force size ceiling.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Size { .. } => 3,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Serialization(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Serialization(e.to_string())
    }
}

impl From<toml::de::Error> for LabError {
    fn from(e: toml::de::Error) -> Self {
        LabError::Config(e.to_string())
    }
}
