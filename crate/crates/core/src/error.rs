use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// A caller supplied an argument outside the operation's domain.
    #[error("invalid input: {0}")]
    Input(String),

    /// A linear-algebra step hit a singular or indefinite matrix.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An operation was invoked on a state that cannot support it.
    #[error("invalid state: {0}")]
    State(String),

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data in {}: {message}", path.display())]
    Data { path: PathBuf, message: String },
}

impl SimError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config { .. } => 2,
            SimError::Io { .. } | SimError::Data { .. } => 3,
            SimError::Input(_) | SimError::Numerical(_) | SimError::State(_) => 1,
        }
    }
}
