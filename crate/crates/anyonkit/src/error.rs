use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("null normalization in module {module} at weight {weight}")]
    NullNorm { module: String, weight: String },
    #[error("inconsistent solution space for {0}")]
    SolutionSpace(String),
    #[error("missing fusion channel: {0}")]
    MissingChannel(String),
    #[error("no valid lowest weight for R-symbol {0}")]
    NoMinimalWeight(String),
    #[error("document error: {0}")]
    Document(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
