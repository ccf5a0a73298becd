use thiserror::Error;

/// Errors raised by corpus ingest, space construction, retrieval and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at {path}:{line}: {reason}")]
    MalformedRecord {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("duplicate document id `{doc_id}`")]
    DuplicateDocId { doc_id: String },

    #[error("mention `{mention_id}` spans a sentence terminator")]
    DegenerateContext { mention_id: String },

    #[error("question references unknown mention `{mention_id}`")]
    DanglingMention { mention_id: String },

    #[error("unknown document key `{key}` in index")]
    UnknownDocKey { key: String },

    #[error("retrieval over an empty {what}")]
    EmptyCollection { what: String },

    #[error("no candidate answer span in passage `{passage_id}`")]
    NoAnswer { passage_id: String },

    #[error("unsupported space file version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("space file {path} declares {declared} pairs but contains {actual}")]
    ChecksumFailure {
        path: String,
        declared: usize,
        actual: usize,
    },

    #[error("empty answer list")]
    EmptyVote,

    #[error("empty evaluation dataset")]
    EmptyDataset,

    #[error("unknown system `{name}`, valid systems: {valid}")]
    UnknownSystem { name: String, valid: String },

    #[error("unknown answer id `{answer_id}`")]
    UnknownAnswerId { answer_id: String },

    #[error("missing artifact: {path}")]
    MissingArtifact { path: String },

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid config: {reason}")]
    InvalidConfig { reason: String },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
