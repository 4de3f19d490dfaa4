use std::path::PathBuf;

use cellnet_core::Error as CoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file: field `{field}`: {reason}")]
    Format { field: String, reason: String },

    #[error("{path}: byte offset {offset}: {reason}")]
    Idx {
        path: PathBuf,
        offset: usize,
        reason: String,
    },

    #[error("{path}: line {line}: {reason}")]
    Csv {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status: 1 usage (including unreadable paths), 2 data,
    /// 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Io { .. } => 1,
            Error::Numerical(_) => 3,
            Error::Format { .. } | Error::Idx { .. } | Error::Csv { .. } => 2,
            Error::Core(e) => match e {
                CoreError::InvalidHyperParam { .. } => 1,
                CoreError::Diverged { .. } | CoreError::NonFiniteGradient { .. } => 3,
                _ => 2,
            },
        }
    }
}
