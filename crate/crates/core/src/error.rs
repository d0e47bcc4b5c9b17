use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },

    #[error("duplicate doc_id {0:?}")]
    DuplicateDocId(String),

    #[error("cannot build an index from an empty corpus")]
    EmptyCorpus,

    #[error("unknown doc_id {0:?}")]
    UnknownDoc(String),

    #[error("empty query")]
    EmptyQuery,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("concept {concept_id:?} has conflicting names {first:?} and {second:?}")]
    ConflictingConceptName {
        concept_id: String,
        first: String,
        second: String,
    },

    #[error("index file {path}: {message}")]
    CorruptIndex { path: PathBuf, message: String },

    #[error("index file {path} has format version {found}, expected {expected}")]
    IndexVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("invalid run for system {system:?}, query {query_id:?}: {message}")]
    InvalidRun {
        system: String,
        query_id: String,
        message: String,
    },

    #[error("duplicate judgment for query {query_id:?}, doc {doc_id:?}")]
    DuplicateJudgment { query_id: String, doc_id: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(
        file: impl Into<String>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Malformed {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
