//! The general recognition pipeline: feature extraction, class models,
//! matching, and labeling, plus the four recognition modes (pair matching,
//! verification, identification, search).

pub mod scorers;

pub use scorers::{
    cosine_scorer, euclidean_scorer, mahalanobis_w_scorer, neighborhood_normalized_scorer,
    one_shot_scorer, squared_euclidean_scorer, CosineScorer, EuclideanScorer, MahalanobisScorer,
    NeighborhoodNormalizedScorer, OneShotScorer, Scorer, SquaredEuclideanScorer,
};

use crate::dataset::{AssumptionBag, Dataset, FeatureVector, RawSample};
use crate::error::{AuditError, Result};
use crate::matrix::Polarity;
use crate::scalar::Scalar;

/// Maps raw samples to feature vectors under extractor-specific assumptions.
///
/// Implementations must be deterministic and produce a fixed output
/// dimension for a fixed assumption set.
pub trait FeatureExtractor<S: Scalar>: Send + Sync {
    fn name(&self) -> &str;
    fn assumptions(&self) -> &AssumptionBag;
    fn extract(&self, sample: &RawSample<S>) -> Result<FeatureVector<S>>;
}

/// Pass-through extraction: the sample values are the feature vector.
#[derive(Debug, Default)]
pub struct IdentityExtractor {
    assumptions: AssumptionBag,
}

impl IdentityExtractor {
    pub fn new() -> Self {
        Self::default()
    }
}

impl<S: Scalar> FeatureExtractor<S> for IdentityExtractor {
    fn name(&self) -> &str {
        "identity"
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn extract(&self, sample: &RawSample<S>) -> Result<FeatureVector<S>> {
        FeatureVector::new(sample.values().to_vec())
    }
}

/// What a recognition system knows about one class: its label, the feature
/// vectors it was trained on, and any modeling assumptions.
#[derive(Debug, Clone)]
pub struct ClassModel<S: Scalar> {
    class_label: u32,
    training_set: Vec<FeatureVector<S>>,
    assumptions: AssumptionBag,
    learned_state: AssumptionBag,
}

impl<S: Scalar> ClassModel<S> {
    /// Label 0 is reserved for the non-match label and cannot name a class.
    pub fn new(class_label: u32, training_set: Vec<FeatureVector<S>>) -> Result<Self> {
        if class_label == 0 {
            return Err(AuditError::ConfigError(
                "class label 0 is reserved for non-match".into(),
            ));
        }
        if training_set.is_empty() {
            return Err(AuditError::TooFewSamples { needed: 1, got: 0 });
        }
        Ok(Self {
            class_label,
            training_set,
            assumptions: AssumptionBag::new(),
            learned_state: AssumptionBag::new(),
        })
    }

    pub fn with_assumptions(mut self, assumptions: AssumptionBag) -> Self {
        self.assumptions = assumptions;
        self
    }

    pub fn class_label(&self) -> u32 {
        self.class_label
    }

    pub fn training_set(&self) -> &[FeatureVector<S>] {
        &self.training_set
    }

    pub fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    pub fn learned_state(&self) -> &AssumptionBag {
        &self.learned_state
    }

    /// One model per class label found in the dataset, exemplars in dataset
    /// order, models ordered by label. Fails on label 0.
    pub fn models_from_dataset(
        dataset: &Dataset<S>,
        extractor: &dyn FeatureExtractor<S>,
    ) -> Result<Vec<ClassModel<S>>> {
        let mut by_label: std::collections::BTreeMap<u32, Vec<FeatureVector<S>>> =
            std::collections::BTreeMap::new();
        for sample in dataset.samples() {
            if sample.label() == 0 {
                return Err(AuditError::ConfigError(format!(
                    "sample {} carries reserved label 0",
                    sample.id()
                )));
            }
            by_label
                .entry(sample.label())
                .or_default()
                .push(extractor.extract(sample)?);
        }
        by_label
            .into_iter()
            .map(|(label, set)| ClassModel::new(label, set))
            .collect()
    }
}

/// Turns a set of similarity scores into a ranked list of class labels,
/// under labeling assumptions (threshold tau, list length k).
#[derive(Debug, Clone)]
pub struct Labeler<S: Scalar> {
    k: usize,
    threshold: Option<S>,
    assumptions: AssumptionBag,
}

impl<S: Scalar> Labeler<S> {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(AuditError::ConfigError("k must be >= 1".into()));
        }
        let assumptions = AssumptionBag::new().with("k", k as f64);
        Ok(Self {
            k,
            threshold: None,
            assumptions,
        })
    }

    /// Threshold for accept/reject decisions. Comparison is strict: a
    /// similarity score must exceed tau (a dissimilarity must fall below it).
    pub fn with_threshold(mut self, tau: S) -> Self {
        self.assumptions
            .set("tau", tau.to_f64().unwrap_or(f64::NAN));
        self.threshold = Some(tau);
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn threshold(&self) -> Option<S> {
        self.threshold
    }

    pub fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }
}

/// Concatenation of two feature vectors of equal dimension.
#[derive(Debug, Clone)]
pub struct PairInput<S: Scalar> {
    values: Vec<S>,
    half_dim: usize,
}

impl<S: Scalar> PairInput<S> {
    pub fn new(first: &FeatureVector<S>, second: &FeatureVector<S>) -> Result<Self> {
        if first.dimension() != second.dimension() {
            return Err(AuditError::DimensionError {
                expected: first.dimension(),
                got: second.dimension(),
            });
        }
        let mut values = first.values().to_vec();
        values.extend_from_slice(second.values());
        Ok(Self {
            values,
            half_dim: first.dimension(),
        })
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn half_dimension(&self) -> usize {
        self.half_dim
    }

    pub fn halves(&self) -> (FeatureVector<S>, FeatureVector<S>) {
        let first = FeatureVector::new(self.values[..self.half_dim].to_vec())
            .expect("pair halves are valid vectors");
        let second = FeatureVector::new(self.values[self.half_dim..].to_vec())
            .expect("pair halves are valid vectors");
        (first, second)
    }
}

/// True when `score` strictly beats the threshold under the polarity
/// convention (similarity: higher accepts; dissimilarity: lower accepts).
fn passes<S: Scalar>(polarity: Polarity, score: S, tau: S) -> bool {
    match polarity {
        Polarity::Similarity => score > tau,
        Polarity::Dissimilarity => score < tau,
    }
}

/// True when `a` is a strictly better score than `b`.
fn better<S: Scalar>(polarity: Polarity, a: S, b: S) -> bool {
    match polarity {
        Polarity::Similarity => a > b,
        Polarity::Dissimilarity => a < b,
    }
}

fn require_threshold<S: Scalar>(labeler: &Labeler<S>) -> Result<S> {
    labeler
        .threshold()
        .ok_or_else(|| AuditError::ConfigError("labeler has no threshold".into()))
}

/// 1:1 matching: do the two halves of the pair match? Returns 1 or 0.
///
/// The class model carries the modeling assumptions of the match class; the
/// bundled scorers compare the two pair halves directly.
pub fn run_pair_matching<S: Scalar>(
    pair: &PairInput<S>,
    _model: &ClassModel<S>,
    scorer: &dyn Scorer<S>,
    labeler: &Labeler<S>,
) -> Result<u32> {
    if labeler.k() != 1 {
        return Err(AuditError::ConfigError(format!(
            "pair matching requires k = 1, got {}",
            labeler.k()
        )));
    }
    let tau = require_threshold(labeler)?;
    let (first, second) = pair.halves();
    let score = scorer.score_pair(&first, &second)?;
    Ok(if passes(scorer.polarity(), score, tau) {
        1
    } else {
        0
    })
}

/// 1:1 matching against a claimed class, possibly over several model views.
/// Returns the claimed label on acceptance, 0 otherwise. Acceptance uses the
/// best (max-similarity / min-dissimilarity) view.
pub fn run_verification<S: Scalar>(
    probe: &FeatureVector<S>,
    claimed: u32,
    models: &[ClassModel<S>],
    scorer: &dyn Scorer<S>,
    labeler: &Labeler<S>,
) -> Result<u32> {
    if claimed == 0 {
        return Err(AuditError::ConfigError(
            "claimed class 0 is the reserved non-match label".into(),
        ));
    }
    if models.is_empty() {
        return Err(AuditError::TooFewSamples { needed: 1, got: 0 });
    }
    for model in models {
        if model.class_label() != claimed {
            return Err(AuditError::ClaimMismatch {
                claimed,
                got: model.class_label(),
            });
        }
    }
    let tau = require_threshold(labeler)?;
    let mut best: Option<S> = None;
    for model in models {
        let s = scorer.score(probe, model)?;
        best = Some(match best {
            None => s,
            Some(b) if better(scorer.polarity(), s, b) => s,
            Some(b) => b,
        });
    }
    let best = best.expect("at least one model");
    Ok(if passes(scorer.polarity(), best, tau) {
        claimed
    } else {
        0
    })
}

/// Best score per class label, folding multiple models of the same class
/// into their best view. Returned sorted by label.
fn class_scores<S: Scalar>(
    probe: &FeatureVector<S>,
    models: &[ClassModel<S>],
    scorer: &dyn Scorer<S>,
) -> Result<Vec<(u32, S)>> {
    let mut by_class: std::collections::BTreeMap<u32, S> = std::collections::BTreeMap::new();
    for model in models {
        let s = scorer.score(probe, model)?;
        by_class
            .entry(model.class_label())
            .and_modify(|b| {
                if better(scorer.polarity(), s, *b) {
                    *b = s;
                }
            })
            .or_insert(s);
    }
    Ok(by_class.into_iter().collect())
}

/// Rank class labels best-first; equal scores break toward the smaller label.
fn ranked_labels<S: Scalar>(scores: &[(u32, S)], polarity: Polarity) -> Vec<u32> {
    let mut order: Vec<&(u32, S)> = scores.iter().collect();
    // Stable sort over label-ascending input: ties keep the smaller label first.
    order.sort_by(|a, b| {
        if better(polarity, a.1, b.1) {
            std::cmp::Ordering::Less
        } else if better(polarity, b.1, a.1) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    order.into_iter().map(|(label, _)| *label).collect()
}

/// 1:n matching returning the single best class label; returns 0 when a
/// rejection threshold is set and no score passes it.
pub fn run_identification<S: Scalar>(
    probe: &FeatureVector<S>,
    models: &[ClassModel<S>],
    scorer: &dyn Scorer<S>,
    labeler: &Labeler<S>,
) -> Result<u32> {
    if labeler.k() != 1 {
        return Err(AuditError::ConfigError(format!(
            "identification requires k = 1, got {}",
            labeler.k()
        )));
    }
    let scores = class_scores(probe, models, scorer)?;
    if scores.len() < 2 {
        return Err(AuditError::TooFewClasses(scores.len()));
    }
    if let Some(tau) = labeler.threshold() {
        if !scores
            .iter()
            .any(|&(_, s)| passes(scorer.polarity(), s, tau))
        {
            return Ok(0);
        }
    }
    Ok(ranked_labels(&scores, scorer.polarity())[0])
}

/// 1:n matching returning the top-k class labels, best first. A rejection
/// threshold, when set, only collapses the result to `[0]` when no class
/// passes it, which keeps `run_search` with k = 1 identical to
/// `run_identification`.
pub fn run_search<S: Scalar>(
    probe: &FeatureVector<S>,
    models: &[ClassModel<S>],
    scorer: &dyn Scorer<S>,
    labeler: &Labeler<S>,
) -> Result<Vec<u32>> {
    let scores = class_scores(probe, models, scorer)?;
    if labeler.k() > scores.len() {
        return Err(AuditError::ConfigError(format!(
            "k = {} exceeds the {} available classes",
            labeler.k(),
            scores.len()
        )));
    }
    if let Some(tau) = labeler.threshold() {
        if !scores
            .iter()
            .any(|&(_, s)| passes(scorer.polarity(), s, tau))
        {
            return Ok(vec![0]);
        }
    }
    let mut ranked = ranked_labels(&scores, scorer.polarity());
    ranked.truncate(labeler.k());
    Ok(ranked)
}

/// A complete recognition system: extractor, class models, scorer, labeler.
pub struct Recognizer<S: Scalar> {
    extractor: Box<dyn FeatureExtractor<S>>,
    models: Vec<ClassModel<S>>,
    scorer: Box<dyn Scorer<S>>,
    labeler: Labeler<S>,
}

impl<S: Scalar> Recognizer<S> {
    pub fn new(
        extractor: Box<dyn FeatureExtractor<S>>,
        models: Vec<ClassModel<S>>,
        scorer: Box<dyn Scorer<S>>,
        labeler: Labeler<S>,
    ) -> Self {
        Self {
            extractor,
            models,
            scorer,
            labeler,
        }
    }

    pub fn models(&self) -> &[ClassModel<S>] {
        &self.models
    }

    pub fn scorer(&self) -> &dyn Scorer<S> {
        self.scorer.as_ref()
    }

    pub fn labeler(&self) -> &Labeler<S> {
        &self.labeler
    }

    /// Pair matching over two raw samples. Requires exactly one model (the
    /// match-class model).
    pub fn pair_match(&self, a: &RawSample<S>, b: &RawSample<S>) -> Result<u32> {
        let model = match self.models.as_slice() {
            [m] => m,
            other => {
                return Err(AuditError::ConfigError(format!(
                    "pair matching needs exactly one class model, got {}",
                    other.len()
                )))
            }
        };
        let pair = PairInput::new(&self.extractor.extract(a)?, &self.extractor.extract(b)?)?;
        run_pair_matching(&pair, model, self.scorer.as_ref(), &self.labeler)
    }

    pub fn verify(&self, sample: &RawSample<S>, claimed: u32) -> Result<u32> {
        let views: Vec<ClassModel<S>> = self
            .models
            .iter()
            .filter(|m| m.class_label() == claimed)
            .cloned()
            .collect();
        if views.is_empty() {
            return Err(AuditError::ConfigError(format!(
                "no model for claimed class {claimed}"
            )));
        }
        let probe = self.extractor.extract(sample)?;
        run_verification(&probe, claimed, &views, self.scorer.as_ref(), &self.labeler)
    }

    pub fn identify(&self, sample: &RawSample<S>) -> Result<u32> {
        let probe = self.extractor.extract(sample)?;
        run_identification(&probe, &self.models, self.scorer.as_ref(), &self.labeler)
    }

    pub fn search(&self, sample: &RawSample<S>) -> Result<Vec<u32>> {
        let probe = self.extractor.extract(sample)?;
        run_search(&probe, &self.models, self.scorer.as_ref(), &self.labeler)
    }
}
