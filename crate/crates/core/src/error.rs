use thiserror::Error;

/// Errors raised by the numerical layers and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The input makes the requested quantity undefined (zero denominators,
    /// constant statistics, single-antenna eigenvalue ratios, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("failed to converge: {0}")]
    Convergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing side information: {0}")]
    MissingSideInfo(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from user configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::MissingSideInfo(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
