use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate entity `{0}`")]
    DuplicateEntity(String),

    #[error("adjective lexicon {} is empty", .0.display())]
    EmptyLexicon(PathBuf),

    #[error("token `{0}` is not in the vocabulary")]
    UnknownToken(String),

    #[error("entity `{0}` is not in the model")]
    UnknownEntity(String),

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("relatedness of `{0}` with itself is undefined")]
    SelfRelatedness(String),

    #[error("token `{0}` has no occurrences in the co-occurrence model")]
    ZeroMarginal(String),

    #[error("cannot compare rankings of `{0}` and `{1}`")]
    EntityMismatch(String, String),

    #[error("empty string has no vector")]
    EmptyWord,

    #[error("{}: not a valid {expected} (bad magic or header)", path.display())]
    BadFormat { path: PathBuf, expected: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing input {what}: {}", path.display())]
    MissingInput { what: &'static str, path: PathBuf },

    #[error("{0}")]
    Pipeline(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Whether the error stems from bad user input detected before any work
    /// was done, as opposed to a failure while running a stage.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Config(_) | Error::MissingInput { .. })
    }
}
