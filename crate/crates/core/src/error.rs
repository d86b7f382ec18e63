//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building matrices, sampling plans,
/// running axiom checks, or driving recognition.
#[derive(Debug, Error)]
pub enum AuditError {
    /// A scorer produced NaN or an infinity at matrix entry (row, col).
    #[error("scorer produced a non-finite value at entry ({0}, {1})")]
    NonFiniteScore(usize, usize),

    /// Vector/matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionError { expected: usize, got: usize },

    /// An operation received a matrix of the wrong polarity.
    #[error("polarity mismatch: expected {expected}, got {got}")]
    PolarityError {
        expected: &'static str,
        got: &'static str,
    },

    /// A triplet plan references indices outside the audited matrix.
    #[error("invalid plan: {0}")]
    PlanError(String),

    /// Too few samples for the requested operation.
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    /// More distinct triples requested than exist.
    #[error("requested {requested} triples but only {available} exist")]
    OverSampled { requested: u64, available: u64 },

    /// A stratum with positive proportion has no candidate triples.
    #[error("stratum {0} is empty in the data")]
    EmptyStratum(&'static str),

    /// classify_function called without all four axiom results.
    #[error("incomplete audit: missing result for {0}")]
    IncompleteAudit(&'static str),

    /// A vector with zero norm where a direction is required.
    #[error("zero-norm vector cannot be scored")]
    ZeroVector,

    /// A one-shot model whose positive coincides with the negative mean.
    #[error("degenerate one-shot model: positive equals the negative mean")]
    DegenerateModel,

    /// Neighborhood band is empty or has zero spread.
    #[error("degenerate neighborhood: {0}")]
    DegenerateNeighborhood(&'static str),

    /// Verification model labelled differently from the claimed class.
    #[error("claim mismatch: model labelled {got}, claimed class {claimed}")]
    ClaimMismatch { claimed: u32, got: u32 },

    /// Identification over fewer than two classes.
    #[error("identification needs at least 2 classes, got {0}")]
    TooFewClasses(usize),

    /// Invalid labeler/scorer configuration.
    #[error("configuration error: {0}")]
    ConfigError(String),

    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    /// Dataset-level invariant broken (duplicate ids, ragged rows, ...).
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AuditError {
    /// Stable machine-readable name of the error variant, used by the CLI
    /// exit-code contract.
    pub fn name(&self) -> &'static str {
        match self {
            AuditError::NonFiniteScore(..) => "NonFiniteScore",
            AuditError::DimensionError { .. } => "DimensionError",
            AuditError::PolarityError { .. } => "PolarityError",
            AuditError::PlanError(..) => "PlanError",
            AuditError::TooFewSamples { .. } => "TooFewSamples",
            AuditError::OverSampled { .. } => "OverSampled",
            AuditError::EmptyStratum(..) => "EmptyStratum",
            AuditError::IncompleteAudit(..) => "IncompleteAudit",
            AuditError::ZeroVector => "ZeroVector",
            AuditError::DegenerateModel => "DegenerateModel",
            AuditError::DegenerateNeighborhood(..) => "DegenerateNeighborhood",
            AuditError::ClaimMismatch { .. } => "ClaimMismatch",
            AuditError::TooFewClasses(..) => "TooFewClasses",
            AuditError::ConfigError(..) => "ConfigError",
            AuditError::ParseError { .. } => "ParseError",
            AuditError::InvalidDataset(..) => "InvalidDataset",
            AuditError::Io(..) => "Io",
        }
    }
}

/// Crate-wide result alias.
pub type Result<T, E = AuditError> = std::result::Result<T, E>;
