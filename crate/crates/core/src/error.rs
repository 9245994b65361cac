use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate doc_id {0:?}")]
    DuplicateId(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("row count mismatch for doc_id {doc_id:?}: expected {expected}, found {found}")]
    CountMismatch {
        doc_id: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("probability {value} for doc_id {doc_id:?} is outside [0, 1]")]
    ProbabilityRange { doc_id: String, value: f64 },

    #[error("missing {what}: {id:?}")]
    Missing { what: &'static str, id: String },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Whether the failure was caused by bad input (as opposed to a bug or
    /// an environment fault inside the tool).
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_input_error(),
            Error::Internal(_) => false,
            _ => true,
        }
    }
}
