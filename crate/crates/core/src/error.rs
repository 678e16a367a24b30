//! Error type shared by all analysis modules.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by callers that map errors to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or missing input data: files, shapes, ids, codes, configuration.
    Input,
    /// Degenerate numerics: undefined correlations, all-zero weights, bad distributions.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bid code {code} at row '{row}', column '{col}' (expected 0..=4)")]
    InvalidBidCode { row: String, col: String, code: i64 },

    #[error("duplicate {kind} id '{id}'")]
    DuplicateId { kind: &'static str, id: String },

    #[error("matrix shape mismatch: {detail}")]
    ShapeMismatch { detail: String },

    #[error("bid vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("bid vectors must be non-empty")]
    EmptyVector,

    #[error("bid matrix is empty after filtering ({detail})")]
    EmptyMatrix { detail: String },

    #[error("similarity matrix invariant violated: {detail}")]
    InvalidSimilarity { detail: String },

    #[error("need at least {needed} entities, got {got}")]
    TooFewEntities { needed: usize, got: usize },

    #[error("unknown {kind} id '{id}'")]
    UnknownId { kind: &'static str, id: String },

    #[error("document '{id}' does not belong to any cluster")]
    DocumentNotClustered { id: String },

    #[error("cluster member '{id}' has no document in the corpus")]
    MissingDocument { id: String },

    #[error("document '{id}' has empty text")]
    EmptyDocument { id: String },

    #[error("group '{id}' has no counted terms (n = 0)")]
    EmptyGroup { id: String },

    #[error("weight vector '{id}' has no positive weights")]
    AllZeroWeights { id: String },

    #[error("not a probability vector: {detail}")]
    NotNormalized { detail: String },

    #[error("publication record '{record}' lists author '{author}' more than once")]
    DuplicateAuthor { record: String, author: String },

    #[error("referees missing from the co-authorship graph: {}", ids.join(", "))]
    MissingReferees { ids: Vec<String> },

    #[error("correlation undefined: {detail}")]
    UndefinedCorrelation { detail: String },

    #[error("matrices have different labels: {detail}")]
    LabelMismatch { detail: String },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("pipeline stage '{stage}' failed: {source}")]
    Pipeline {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Classify the error for exit-code mapping.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::UndefinedCorrelation { .. }
            | Error::AllZeroWeights { .. }
            | Error::NotNormalized { .. } => ErrorClass::Numerical,
            Error::Pipeline { source, .. } => source.class(),
            _ => ErrorClass::Input,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), detail: detail.into() }
    }
}
