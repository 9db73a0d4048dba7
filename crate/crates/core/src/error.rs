use thiserror::Error;

/// Errors produced by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no foreground pixels")]
    NoForeground,
    #[error("no-iris: {0}")]
    NoIris(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("inconsistent geometry: {0}")]
    InconsistentGeometry(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("templates share no valid bits at any shift")]
    NoOverlap,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("malformed {kind} data: {reason}")]
    Format { kind: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short machine-readable tag, used in failure rows.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidRange(_) => "invalid-range",
            Error::Shape(_) => "shape",
            Error::NoForeground => "no-foreground",
            Error::NoIris(_) => "no-iris",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::InconsistentGeometry(_) => "inconsistent-geometry",
            Error::Config(_) => "config",
            Error::NoOverlap => "no-overlap",
            Error::EmptyInput(_) => "empty-input",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
