use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),

    #[error("hypercube vertex exhaustion: {classes} classes x {clusters} clusters need more than 2^{informative} vertices")]
    VertexExhaustion {
        classes: usize,
        clusters: usize,
        informative: usize,
    },

    #[error("csv parse error at row {row}, column {col}: {msg}")]
    CsvParse { row: usize, col: usize, msg: String },

    #[error("dataset validation failed: {0}")]
    InvalidDataset(String),

    #[error("pool initialization failed: {0}")]
    PoolInit(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("feature width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("input width mismatch: net expects {expected}, got {got}")]
    InputWidth { expected: usize, got: usize },

    #[error("policy variant mismatch: expected {expected}, file contains {got}")]
    VariantMismatch { expected: String, got: String },

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error("pre-sampling requires j >= k (j={j}, k={k})")]
    PresampleTooFew { j: usize, k: usize },

    #[error("empty reference set for distance computation")]
    EmptyReferenceSet,

    #[error("learning curve needs at least 2 points, got {0}")]
    CurveTooShort(usize),

    #[error("query protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),

    #[error("missing upstream artifact: {0}")]
    MissingArtifact(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
