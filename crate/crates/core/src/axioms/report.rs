//! Report-side types for axiom audits: tolerances, violation evidence,
//! per-axiom tallies, and the aggregate report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::sampling::PlanDescription;
use crate::scalar::Scalar;

/// Comparison slack: `a > b` counts as a violation only when
/// `a - b > abs_eps + rel_eps * max(|a|, |b|)`.
///
/// The default (1e-9 absolute and relative) suppresses pure floating-point
/// noise while catching real violations, whose margins are orders of
/// magnitude larger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Tolerance<S: Scalar> {
    abs_eps: S,
    rel_eps: S,
}

impl<S: Scalar> Tolerance<S> {
    pub fn new(abs_eps: S, rel_eps: S) -> Result<Self> {
        if !(abs_eps >= S::zero() && abs_eps.is_finite()) {
            return Err(AuditError::ConfigError(format!(
                "abs_eps must be finite and >= 0, got {abs_eps}"
            )));
        }
        if !(rel_eps >= S::zero() && rel_eps.is_finite()) {
            return Err(AuditError::ConfigError(format!(
                "rel_eps must be finite and >= 0, got {rel_eps}"
            )));
        }
        Ok(Self { abs_eps, rel_eps })
    }

    pub fn abs_eps(&self) -> S {
        self.abs_eps
    }

    pub fn rel_eps(&self) -> S {
        self.rel_eps
    }

    /// Allowed slack when comparing `a` against `b`.
    pub fn slack(&self, a: S, b: S) -> S {
        let scale = a.abs().max(b.abs());
        self.abs_eps + self.rel_eps * scale
    }

    /// Does `a` exceed `b` by more than the slack?
    pub fn exceeds(&self, a: S, b: S) -> bool {
        a - b > self.slack(a, b)
    }

    /// Are `a` and `b` equal within the slack?
    pub fn equal_within(&self, a: S, b: S) -> bool {
        !self.exceeds(a, b) && !self.exceeds(b, a)
    }
}

impl<S: Scalar> Default for Tolerance<S> {
    fn default() -> Self {
        let eps = S::from_f64(1e-9).expect("1e-9 representable");
        Self {
            abs_eps: eps,
            rel_eps: eps,
        }
    }
}

/// The specific check a violation record comes from. Identity is audited as
/// two sub-checks that classify together as one axiom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationAxiom {
    NonNegativity,
    IdentitySelf,
    IdentityDistinct,
    Symmetry,
    Triangle,
}

/// Axiom names at classification granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomName {
    NonNegativity,
    Identity,
    Symmetry,
    Triangle,
}

impl AxiomName {
    pub const ALL: [AxiomName; 4] = [
        AxiomName::NonNegativity,
        AxiomName::Identity,
        AxiomName::Symmetry,
        AxiomName::Triangle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxiomName::NonNegativity => "non_negativity",
            AxiomName::Identity => "identity",
            AxiomName::Symmetry => "symmetry",
            AxiomName::Triangle => "triangle",
        }
    }
}

/// Evidence for one failed check: which axiom, the matrix positions
/// involved (dataset order), the offending scores, and the margin by which
/// the inequality failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ViolationRecord<S: Scalar> {
    pub axiom: ViolationAxiom,
    pub indices: Vec<usize>,
    pub values: Vec<S>,
    pub margin: S,
}

/// 95% Wilson score interval for a binomial proportion. Returns (0, 1) for
/// zero checks; well-behaved at zero violations.
pub fn wilson_interval(violations: u64, checked: u64) -> (f64, f64) {
    if checked == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = checked as f64;
    let p = violations as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // at the boundary rates the exact bound is the rate itself
    let lo = if violations == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if violations == checked {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Outcome of one axiom check: counts, rate, Wilson interval, and a bounded
/// sample of violation records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AxiomResult<S: Scalar> {
    pub checked: u64,
    pub violations: u64,
    pub rate: f64,
    pub ci95: (f64, f64),
    pub samples: Vec<ViolationRecord<S>>,
}

impl<S: Scalar> AxiomResult<S> {
    /// Build from counts, keeping at most `cap` sample records.
    pub fn from_records(
        checked: u64,
        violations: u64,
        mut samples: Vec<ViolationRecord<S>>,
        cap: usize,
    ) -> Self {
        samples.truncate(cap);
        let rate = if checked == 0 {
            0.0
        } else {
            violations as f64 / checked as f64
        };
        Self {
            checked,
            violations,
            rate,
            ci95: wilson_interval(violations, checked),
            samples,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// One bin of the symmetry-difference histogram; covers
/// [lo, lo + bin_width).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HistogramBin<S: Scalar> {
    pub lo: S,
    pub count: u64,
}

/// Binned symmetry differences d(i,j) - d(j,i), zeros included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Histogram<S: Scalar> {
    pub bin_width: S,
    pub bins: Vec<HistogramBin<S>>,
}

impl<S: Scalar> Histogram<S> {
    pub fn build(values: impl Iterator<Item = S>, bin_width: S) -> Self {
        let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
        for v in values {
            let ratio = (v / bin_width).floor();
            // clamp indices that overflow i64 instead of folding them into bin 0
            let index = ratio.to_i64().unwrap_or(if ratio > S::zero() {
                i64::MAX
            } else {
                i64::MIN
            });
            *counts.entry(index).or_insert(0) += 1;
        }
        let bins = counts
            .into_iter()
            .map(|(index, count)| HistogramBin {
                lo: S::from_i64(index).expect("index representable") * bin_width,
                count,
            })
            .collect();
        Self { bin_width, bins }
    }

    /// Total count in bins other than the one starting at 0 (the bin that
    /// holds exact symmetry).
    pub fn mass_off_zero_bin(&self) -> u64 {
        self.bins
            .iter()
            .filter(|b| b.lo != S::zero())
            .map(|b| b.count)
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// Two-column CSV (`lo,count`) for plotting.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("lo,count\n");
        for bin in &self.bins {
            out.push_str(&format!("{},{}\n", bin.lo, bin.count));
        }
        out
    }
}

/// Where the similarity-to-dissimilarity transform anchors its maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformScope {
    /// One s_max over the whole matrix (default; audits of different
    /// triples stay comparable).
    Global,
    /// Triangle checks re-anchor to the largest raw score within each
    /// triple; the other axioms keep the global transform.
    PerTriplet,
}

/// How the audited matrix relates to the raw scorer output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TransformInfo<S: Scalar> {
    pub applied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<S>,
    pub scope: TransformScope,
}

/// Taxonomy label: a metric, one of the three single-relaxation classes, or
/// non-metric with the list of failed axioms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassificationLabel {
    Metric,
    Pseudometric,
    Quasimetric,
    Semimetric,
    Nonmetric(Vec<AxiomName>),
}

/// Aggregate result of one audit: configuration echo, per-axiom outcomes,
/// classification, and the plot-ready symmetry histogram and violation
/// curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AuditReport<S: Scalar> {
    pub scorer: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerance: Tolerance<S>,
    pub plan: PlanDescription,
    pub transform: TransformInfo<S>,
    pub axioms: BTreeMap<AxiomName, AxiomResult<S>>,
    pub classification: ClassificationLabel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry_histogram: Option<Histogram<S>>,
    /// Cumulative violating triangle inequalities after (checkpoint)
    /// triples, at logarithmically spaced checkpoints in plan order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation_curve: Option<Vec<(u64, u64)>>,
}

impl<S: Scalar> AuditReport<S> {
    pub fn axiom(&self, name: AxiomName) -> &AxiomResult<S> {
        self.axioms
            .get(&name)
            .expect("report holds all four axioms")
    }

    /// Drop the plot payloads (classification-only view).
    pub fn without_plots(mut self) -> Self {
        self.symmetry_histogram = None;
        self.violation_curve = None;
        self
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| AuditError::ConfigError(format!("serialization failed: {e}")))
    }

    /// Two-column CSV of the violation curve.
    pub fn curve_to_csv_string(&self) -> Option<String> {
        let curve = self.violation_curve.as_ref()?;
        let mut out = String::from("triplets_checked,cumulative_violations\n");
        for (x, y) in curve {
            out.push_str(&format!("{x},{y}\n"));
        }
        Some(out)
    }
}
