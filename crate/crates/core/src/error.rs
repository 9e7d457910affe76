use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell ({x}, {y}) is outside the {width}x{height} map")]
    OutOfBounds { x: i64, y: i64, width: usize, height: usize },
    #[error("cell ({x}, {y}) is blocked")]
    Blocked { x: usize, y: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid priority ordering: {0}")]
    InvalidOrdering(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
