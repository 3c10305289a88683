use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller passed mismatched dimensions or otherwise malformed arguments.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Bad configuration file or unknown name.
    #[error("config error: {0}")]
    Config(String),

    /// Non-finite value encountered; the run aborts with a diagnostic.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Operation called in a state it does not support (e.g. empty buffer).
    #[error("state error: {0}")]
    State(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for config problems, 2 for numeric aborts.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Numeric(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
