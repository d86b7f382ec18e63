//! Config echoes embedded in emitted reports so any run can be replayed.

use serde::{Deserialize, Serialize};

/// Everything that determines an audit's output bytes (worker count and
/// timestamps are runtime metadata and deliberately excluded).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditRunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scorer: Option<String>,
    pub triplets: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata: Option<String>,
    pub seed: u64,
    pub abs_eps: f64,
    pub rel_eps: f64,
    pub bin_width: f64,
    pub transform_scope: String,
    pub force_transform: bool,
    pub fail_on_violation: bool,
    pub output: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecognizeRunConfig {
    pub command: String,
    pub mode: String,
    pub gallery: String,
    pub probe: String,
    pub scorer: String,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed_class: Option<u32>,
    pub output: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaRunConfig {
    pub command: String,
    pub dataset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub format: String,
    pub output: String,
}

/// Report envelope: the timestamp is the single non-deterministic field;
/// everything under `config` + the seed reproduces `report` byte-for-byte.
#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub timestamp: String,
    pub config: C,
    pub report: R,
}
