use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group order {0}: must be at least 1")]
    InvalidOrder(i64),
    #[error("invalid subgroup embedding: {0}")]
    InvalidEmbedding(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("field type error: {0}")]
    FieldType(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("graph error: {0}")]
    Graph(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("action is undefined for the zero vector")]
    UndefinedAction,
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("corrupt archive: {0}")]
    Corrupt(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("loss is undefined for a sample with an empty mask")]
    DegenerateSample,
    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },
    #[error("invalid rollout start node {0}")]
    InvalidStart(usize),
    #[error("missing dataset {0}")]
    MissingData(PathBuf),
    #[error("missing checkpoint {0}")]
    MissingCheckpoint(PathBuf),
    #[error("output already exists: {0} (use --force to overwrite)")]
    OutputExists(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("plot rendering failed: {0}")]
    Plot(String),
}
