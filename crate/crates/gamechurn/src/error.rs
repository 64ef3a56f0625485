use std::io;
use std::path::Path;

/// Core errors plus the IO failures only the std layer can hit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gamechurn_core::Error),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(e) => e.kind(),
            Error::Io(_) => "io_error",
        }
    }

    /// Usage-class failures exit with code 2, everything else with 1.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Core(gamechurn_core::Error::Config(_) | gamechurn_core::Error::Alignment(_)))
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        Error::Io(format!("{}: {err}", path.display()))
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Core(gamechurn_core::Error::Format(msg.into()))
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Core(gamechurn_core::Error::Config(msg.into()))
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::format(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::format(e.to_string())
        }
    }
}
