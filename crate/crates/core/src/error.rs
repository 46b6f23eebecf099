use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which side of a comparison an empty fact set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Reviews,
    Summary,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Reviews => f.write_str("reviews"),
            Side::Summary => f.write_str("summary"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("no tuple structure found in completion: {raw:?}")]
    Parse { raw: String },

    #[error("provider error: {message}")]
    Provider {
        message: String,
        /// Transport failures and 5xx responses are worth another attempt.
        retryable: bool,
    },

    #[error("offline mode: no cached completion for key {key}")]
    CacheMiss { key: String },

    #[error("extraction failed for text {index}: {source}")]
    Extraction {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("embedding failed at tuple {index}: {source}")]
    Embedding {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no fact tuples were extracted from the {0}")]
    EmptyExtraction(Side),

    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips `Extraction`/`Embedding` wrappers down to the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::Extraction { source, .. } | Error::Embedding { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::Provider {
                retryable: true,
                ..
            }
        )
    }
}
