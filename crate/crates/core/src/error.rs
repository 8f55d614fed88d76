use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("label value {value} at row {row}, column {column} is not 0 or 1")]
    LabelDomainError { row: usize, column: usize, value: f32 },

    #[error("zero-norm embedding: {0}")]
    ZeroNormEmbedding(String),

    #[error("invalid prompt bank: {0}")]
    InvalidPromptBank(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("too few rows: {rows} rows cannot fill {tasks} tasks")]
    TooFewRows { rows: usize, tasks: usize },

    #[error("identity init needs hidden_dim >= {required}, got {hidden_dim}")]
    IdentityInitInfeasible { hidden_dim: usize, required: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("stale cache: {0}")]
    StaleCache(String),

    #[error("zero-norm vector: {0}")]
    ZeroNormVector(String),

    #[error("label mask selects no disease")]
    EmptyMask,

    #[error("non-finite gradient in tensor {tensor} at index {index} (step {step})")]
    NonFiniteGradient { tensor: usize, index: usize, step: u64 },

    #[error("schedule does not match dataset: {0}")]
    ScheduleMismatch(String),

    #[error("every disease has single-class labels, AUC undefined")]
    AllUndefined,

    #[error("degenerate labels for disease {0}")]
    DegenerateLabels(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty report")]
    EmptyReport,

    #[error("{failed} of {total} sweep cells failed: {cells:?}")]
    SweepFailed { failed: usize, total: usize, cells: Vec<String> },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Stable class name printed by the command-line tool.
    pub fn class(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "MissingFile",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::LabelDomainError { .. } => "LabelDomainError",
            Error::ZeroNormEmbedding(_) => "ZeroNormEmbedding",
            Error::InvalidPromptBank(_) => "InvalidPromptBank",
            Error::Manifest(_) => "ManifestError",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::IdentityInitInfeasible { .. } => "IdentityInitInfeasible",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::StaleCache(_) => "StaleCache",
            Error::ZeroNormVector(_) => "ZeroNormVector",
            Error::EmptyMask => "EmptyMask",
            Error::NonFiniteGradient { .. } => "NonFiniteGradient",
            Error::ScheduleMismatch(_) => "ScheduleMismatch",
            Error::AllUndefined => "AllUndefined",
            Error::DegenerateLabels(_) => "DegenerateLabels",
            Error::Config(_) => "ConfigError",
            Error::EmptyReport => "EmptyReport",
            Error::SweepFailed { .. } => "SweepFailed",
            Error::Io { .. } => "IoError",
            Error::Json(_) => "JsonError",
        }
    }

    /// Process exit code: 2 config, 3 data, 4 numeric, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::IdentityInitInfeasible { .. } => 2,
            Error::MissingFile(_)
            | Error::DimensionMismatch(_)
            | Error::LabelDomainError { .. }
            | Error::ZeroNormEmbedding(_)
            | Error::InvalidPromptBank(_)
            | Error::Manifest(_)
            | Error::TooFewRows { .. }
            | Error::ScheduleMismatch(_)
            | Error::DegenerateLabels(_)
            | Error::AllUndefined
            | Error::Json(_) => 3,
            Error::NonFiniteGradient { .. }
            | Error::ZeroNormVector(_)
            | Error::ShapeMismatch(_)
            | Error::StaleCache(_)
            | Error::EmptyMask => 4,
            Error::EmptyReport | Error::SweepFailed { .. } | Error::Io { .. } => 1,
        }
    }
}
