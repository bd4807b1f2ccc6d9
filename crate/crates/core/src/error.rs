use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("CSV error in {context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("surface form {form:?} ({kind}) is listed by both {first:?} and {second:?}")]
    DuplicateSurfaceForm {
        kind: crate::glossary::WordKind,
        form: String,
        first: String,
        second: String,
    },

    #[error("no embedding for term {0:?}")]
    MissingEmbedding(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed dependency annotation: {0}")]
    MalformedAnnotation(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("insufficient support: {treated} treated / {control} control units, need {min} of each")]
    InsufficientSupport {
        treated: usize,
        control: usize,
        min: usize,
    },

    #[error("no treated unit found a control within the caliper")]
    NoMatches,

    #[error("annotation for {action_id} has {votes} votes, at least 3 required")]
    TooFewVotes { action_id: String, votes: usize },

    #[error("annotation refers to action {0} which is not awaiting manual check")]
    UnexpectedAnnotation(String),

    #[error("unknown dish pair {0:?}")]
    UnknownPair(String),

    #[error("dish {0:?} does not occur in the corpus")]
    UnknownDish(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn csv(context: impl Into<String>, source: csv::Error) -> Self {
        Error::Csv {
            context: context.into(),
            source,
        }
    }

    /// Name of the failing stage, when the error came out of the pipeline runner.
    pub fn stage(&self) -> Option<&str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
