use crate::collation::CollationError;
use crate::feedback::FeedbackError;
use crate::full::FullIndexError;
use crate::location::LocationError;
use crate::prefix::PrefixError;
use crate::sparse::SparseError;
use crate::store::IndexState;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Collation(#[from] CollationError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Full(#[from] FullIndexError),
    #[error(transparent)]
    Location(#[from] LocationError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error(transparent)]
    Prefix(#[from] PrefixError),
    #[error("{kind} {id:?} is already registered")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("unknown dictionary {0:?}")]
    UnknownDictionary(String),
    #[error("transition {from:?} -> {to:?} is not allowed")]
    IllegalTransition { from: IndexState, to: IndexState },
    #[error("state {state:?} requires {artifact}")]
    MissingArtifact { state: IndexState, artifact: &'static str },
    #[error("{word:?} has no marker or full-index entry in {dictionary_id:?}")]
    UnknownTarget { dictionary_id: String, word: String },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

impl Error {
    /// Machine-readable code used in HTTP error bodies and FFI messages.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Collation(_) => "INVALID_TAILORING",
            Error::Sparse(SparseError::Parse { .. }) | Error::Full(FullIndexError::Parse { .. }) => "PARSE_ERROR",
            Error::Sparse(SparseError::PageOutOfRange { .. }) | Error::Full(FullIndexError::PageOutOfRange { .. }) => {
                "PAGE_OUT_OF_RANGE"
            }
            Error::Sparse(SparseError::SortViolation(_)) => "SORT_VIOLATION",
            Error::Sparse(_) | Error::Full(_) => "INVALID_INDEX",
            Error::Location(LocationError::OutOfBounds { .. }) => "MARKER_OUT_OF_BOUNDS",
            Error::Location(LocationError::OrderViolation) => "ORDER_VIOLATION",
            Error::Location(_) => "INVALID_LOCATION",
            Error::Feedback(FeedbackError::IrrelevantPage { .. }) => "IRRELEVANT_PAGE",
            Error::Feedback(FeedbackError::UnknownDictionary(_)) | Error::UnknownDictionary(_) => "UNKNOWN_DICTIONARY",
            Error::Feedback(FeedbackError::Promotion(_)) => "PROMOTION_FAILED",
            Error::Prefix(PrefixError::UnknownPrefix(_)) => "UNKNOWN_PREFIX",
            Error::Prefix(_) => "INVALID_WORDLIST",
            Error::DuplicateId { .. } => "DUPLICATE_ID",
            Error::UnknownLanguage(_) => "UNKNOWN_LANGUAGE",
            Error::IllegalTransition { .. } => "ILLEGAL_TRANSITION",
            Error::MissingArtifact { .. } => "MISSING_ARTIFACT",
            Error::UnknownTarget { .. } => "UNKNOWN_TARGET",
            Error::InvalidManifest(_) => "INVALID_MANIFEST",
            Error::InvalidPayload(_) => "INVALID_PAYLOAD",
            Error::Io { .. } => "IO_ERROR",
            Error::Format { .. } => "FORMAT_ERROR",
        }
    }

    /// True for errors caused by the caller's input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Format { .. })
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn format(path: impl AsRef<std::path::Path>, message: impl ToString) -> Self {
        Error::Format {
            path: path.as_ref().display().to_string(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
