use thiserror::Error;

/// Errors produced anywhere in the clustering pipeline.
#[derive(Debug, Error)]
pub enum FontError {
    #[error("need at least {k} points to fit {k} clusters, got {n}")]
    TooFewPoints { n: usize, k: usize },

    #[error("need at least {k} sequences to fit {k} components, got {n}")]
    TooFewSequences { n: usize, k: usize },

    #[error("input contains non-finite values")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state {state} outside 1..={states}")]
    InvalidState { state: usize, states: usize },

    #[error("sequence {index} has length {len}; at least 2 required")]
    SequenceTooShort { index: usize, len: usize },

    #[error("model kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("label {label} out of range for {k} clusters")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("distance representations cover different subject counts ({a} vs {b})")]
    SubjectCountMismatch { a: usize, b: usize },

    #[error("distance representation of model {0} is degenerate (single predicted cluster)")]
    DegenerateRep(usize),

    #[error("every distance representation is degenerate (single predicted cluster)")]
    AllDegenerate,

    #[error("leading eigenvector did not converge: {0}")]
    EigenFailure(String),

    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("at least {min} values required, got {got}")]
    TooFewModels { min: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("ground truth labels required")]
    TruthRequired,

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("oracle method `{0}` requires --allow-oracle")]
    OracleNotAllowed(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FontError>;
