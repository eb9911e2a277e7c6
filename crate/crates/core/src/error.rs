use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the feature-extraction / selection / training pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("corrupt manifest: {0}")]
    Manifest(String),

    #[error("dimension mismatch ({context}): expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("class {0} has no epochs")]
    EmptyClass(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signal of length {len} is too short (needs more than {needed} samples)")]
    SignalTooShort { len: usize, needed: usize },

    #[error("mutual-information filter kept no features")]
    EmptySelection,

    #[error("criterion returned a non-finite value for subset {0:?}")]
    NonFiniteCriterion(Vec<usize>),

    #[error("class {class} has {count} members, fewer than {folds} folds")]
    ClassTooSmall {
        class: u8,
        count: usize,
        folds: usize,
    },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("leave-one-subject-out needs at least two subjects")]
    SingleSubject,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("leakage: test rows reached {stage}")]
    Leakage { stage: &'static str },

    #[error("schema version {found} not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),
}

impl Error {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Config(_) => "config",
            Error::Manifest(_) => "manifest",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::EmptyClass(_) => "empty_class",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::SignalTooShort { .. } => "signal_too_short",
            Error::EmptySelection => "empty_selection",
            Error::NonFiniteCriterion(_) => "non_finite_criterion",
            Error::ClassTooSmall { .. } => "class_too_small",
            Error::SingleClass => "single_class",
            Error::SingleSubject => "single_subject",
            Error::EmptyInput(_) => "empty_input",
            Error::NonFiniteLoss { .. } => "non_finite_loss",
            Error::Leakage { .. } => "leakage",
            Error::SchemaVersion { .. } => "schema_version",
            Error::MissingArtifact(_) => "missing_artifact",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
