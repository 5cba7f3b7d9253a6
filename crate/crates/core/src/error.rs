use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The gradient is a multiple of the identity, so every quantity scaled by
    /// the spectral width is undefined.
    #[error("degenerate spectral width (gradient is a multiple of the identity)")]
    DegenerateDelta,

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::Domain(_) => "DomainError",
            Error::DegenerateDelta => "DegenerateDelta",
            Error::NoConvergence => "NoConvergence",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
