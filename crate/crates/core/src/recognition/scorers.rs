//! Matching functions whose axiom behavior the audit machinery probes.
//!
//! All scorers are pure and safe to call concurrently. Pairwise scoring is
//! the fundamental operation; scoring a probe against a multi-exemplar class
//! model defaults to nearest-exemplar matching.

use crate::dataset::{AssumptionBag, Dataset, FeatureVector};
use crate::error::{AuditError, Result};
use crate::matrix::Polarity;
use crate::recognition::ClassModel;
use crate::scalar::{mean, population_std_dev, sum, Scalar};

/// A matching function R: produces a score for a probe against a reference
/// vector or a class model, under matching-specific assumptions.
pub trait Scorer<S: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// Whether larger scores mean more similar (`Similarity`) or less
    /// (`Dissimilarity`).
    fn polarity(&self) -> Polarity;

    fn assumptions(&self) -> &AssumptionBag;

    /// Score a probe vector against a single reference vector. For pair-wise
    /// scorers this treats (probe, reference) as the two pair elements.
    fn score_pair(&self, probe: &FeatureVector<S>, reference: &FeatureVector<S>) -> Result<S>;

    /// Score a probe against a class model: the best pairwise score over the
    /// model's training set (nearest-exemplar matching).
    fn score(&self, probe: &FeatureVector<S>, model: &ClassModel<S>) -> Result<S> {
        let mut best: Option<S> = None;
        for exemplar in model.training_set() {
            let s = self.score_pair(probe, exemplar)?;
            best = Some(match (best, self.polarity()) {
                (None, _) => s,
                (Some(b), Polarity::Similarity) => {
                    if s > b {
                        s
                    } else {
                        b
                    }
                }
                (Some(b), Polarity::Dissimilarity) => {
                    if s < b {
                        s
                    } else {
                        b
                    }
                }
            });
        }
        best.ok_or(AuditError::TooFewSamples { needed: 1, got: 0 })
    }
}

fn check_dims<S: Scalar>(a: &FeatureVector<S>, b: &FeatureVector<S>) -> Result<()> {
    if a.dimension() != b.dimension() {
        return Err(AuditError::DimensionError {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    Ok(())
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    sum(a.iter().zip(b).map(|(&x, &y)| x * y))
}

/// Euclidean distance.
#[derive(Debug)]
pub struct EuclideanScorer {
    assumptions: AssumptionBag,
}

pub fn euclidean_scorer<S: Scalar>() -> EuclideanScorer {
    EuclideanScorer {
        assumptions: AssumptionBag::new(),
    }
}

impl<S: Scalar> Scorer<S> for EuclideanScorer {
    fn name(&self) -> &str {
        "euclidean"
    }

    fn polarity(&self) -> Polarity {
        Polarity::Dissimilarity
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn score_pair(&self, probe: &FeatureVector<S>, reference: &FeatureVector<S>) -> Result<S> {
        check_dims(probe, reference)?;
        let sq = sum(probe
            .values()
            .iter()
            .zip(reference.values())
            .map(|(&a, &b)| (a - b) * (a - b)));
        Ok(sq.sqrt())
    }
}

/// Squared Euclidean distance (the W = I quadratic form without the root).
#[derive(Debug)]
pub struct SquaredEuclideanScorer {
    assumptions: AssumptionBag,
}

pub fn squared_euclidean_scorer<S: Scalar>() -> SquaredEuclideanScorer {
    SquaredEuclideanScorer {
        assumptions: AssumptionBag::new(),
    }
}

impl<S: Scalar> Scorer<S> for SquaredEuclideanScorer {
    fn name(&self) -> &str {
        "sq_euclidean"
    }

    fn polarity(&self) -> Polarity {
        Polarity::Dissimilarity
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn score_pair(&self, probe: &FeatureVector<S>, reference: &FeatureVector<S>) -> Result<S> {
        check_dims(probe, reference)?;
        Ok(sum(probe
            .values()
            .iter()
            .zip(reference.values())
            .map(|(&a, &b)| (a - b) * (a - b))))
    }
}

/// The learned-matrix quadratic form d_W(a, b) = (a-b)^T W (a-b).
///
/// W is deliberately unconstrained: it need not be symmetric or positive
/// semi-definite, so the score can go negative. Options add a square root
/// (metric for symmetric PSD W) or a sigmoid wrapper `sigmoid(bias - d_W)`,
/// which flips the polarity to similarity.
#[derive(Debug)]
pub struct MahalanobisScorer<S: Scalar> {
    w: Vec<Vec<S>>,
    dim: usize,
    sqrt: bool,
    sigmoid_bias: Option<S>,
    assumptions: AssumptionBag,
}

pub fn mahalanobis_w_scorer<S: Scalar>(w: Vec<Vec<S>>) -> Result<MahalanobisScorer<S>> {
    let dim = w.len();
    if dim == 0 {
        return Err(AuditError::ConfigError("W must be non-empty".into()));
    }
    for row in &w {
        if row.len() != dim {
            return Err(AuditError::DimensionError {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(AuditError::ConfigError(
                "W contains non-finite entries".into(),
            ));
        }
    }
    let assumptions = AssumptionBag::new().with("dim", dim as f64);
    Ok(MahalanobisScorer {
        w,
        dim,
        sqrt: false,
        sigmoid_bias: None,
        assumptions,
    })
}

impl<S: Scalar> MahalanobisScorer<S> {
    /// Take the square root of the quadratic form. NaN for negative forms,
    /// which matrix construction reports as a non-finite score.
    pub fn with_sqrt(mut self) -> Self {
        self.sqrt = true;
        self.assumptions.set("sqrt", 1.0);
        self
    }

    /// Wrap the raw form as `sigmoid(bias - d_W)`; output becomes a
    /// similarity in (0, 1).
    pub fn with_sigmoid(mut self, bias: S) -> Self {
        self.assumptions
            .set("sigmoid_bias", bias.to_f64().unwrap_or(f64::NAN));
        self.sigmoid_bias = Some(bias);
        self
    }
}

impl<S: Scalar> Scorer<S> for MahalanobisScorer<S> {
    fn name(&self) -> &str {
        "mahalanobis"
    }

    fn polarity(&self) -> Polarity {
        if self.sigmoid_bias.is_some() {
            Polarity::Similarity
        } else {
            Polarity::Dissimilarity
        }
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn score_pair(&self, probe: &FeatureVector<S>, reference: &FeatureVector<S>) -> Result<S> {
        check_dims(probe, reference)?;
        if probe.dimension() != self.dim {
            return Err(AuditError::DimensionError {
                expected: self.dim,
                got: probe.dimension(),
            });
        }
        let diff: Vec<S> = probe
            .values()
            .iter()
            .zip(reference.values())
            .map(|(&a, &b)| a - b)
            .collect();
        let mut form = S::zero();
        for (i, row) in self.w.iter().enumerate() {
            form = form + diff[i] * dot(row, &diff);
        }
        let mut out = form;
        if self.sqrt {
            out = out.sqrt();
        }
        if let Some(bias) = self.sigmoid_bias {
            let x = bias - out;
            out = S::one() / (S::one() + (-x).exp());
        }
        Ok(out)
    }
}

/// Cosine of the angle between (optionally linearly mapped) vectors.
/// Similarity in [-1, 1].
#[derive(Debug)]
pub struct CosineScorer<S: Scalar> {
    map: Option<Vec<Vec<S>>>,
    assumptions: AssumptionBag,
}

pub fn cosine_scorer<S: Scalar>(map: Option<Vec<Vec<S>>>) -> Result<CosineScorer<S>> {
    if let Some(a) = &map {
        let dim = a.len();
        if dim == 0 {
            return Err(AuditError::ConfigError("A must be non-empty".into()));
        }
        for row in a {
            if row.len() != dim {
                return Err(AuditError::DimensionError {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(AuditError::ConfigError(
                    "A contains non-finite entries".into(),
                ));
            }
        }
    }
    let mut assumptions = AssumptionBag::new();
    if let Some(a) = &map {
        assumptions.set("map_dim", a.len() as f64);
    }
    Ok(CosineScorer { map, assumptions })
}

impl<S: Scalar> CosineScorer<S> {
    fn apply_map(&self, v: &FeatureVector<S>) -> Result<Vec<S>> {
        match &self.map {
            None => Ok(v.values().to_vec()),
            Some(a) => {
                if v.dimension() != a.len() {
                    return Err(AuditError::DimensionError {
                        expected: a.len(),
                        got: v.dimension(),
                    });
                }
                Ok(a.iter().map(|row| dot(row, v.values())).collect())
            }
        }
    }
}

impl<S: Scalar> Scorer<S> for CosineScorer<S> {
    fn name(&self) -> &str {
        "cosine"
    }

    fn polarity(&self) -> Polarity {
        Polarity::Similarity
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn score_pair(&self, probe: &FeatureVector<S>, reference: &FeatureVector<S>) -> Result<S> {
        check_dims(probe, reference)?;
        let a = self.apply_map(probe)?;
        let b = self.apply_map(reference)?;
        let na = dot(&a, &a).sqrt();
        let nb = dot(&b, &b).sqrt();
        if na == S::zero() || nb == S::zero() {
            return Err(AuditError::ZeroVector);
        }
        Ok(dot(&a, &b) / (na * nb))
    }
}

/// One-shot similarity: two linear discriminants trained at score time, one
/// per pair element, against a fixed negative set; their scores averaged.
///
/// Each discriminant separates one pair element x_i from the negative mean:
/// weights w_i = x_i - mu_N, bias through the midpoint of x_i and mu_N.
#[derive(Debug)]
pub struct OneShotScorer<S: Scalar> {
    negative_mean: Vec<S>,
    assumptions: AssumptionBag,
}

pub fn one_shot_scorer<S: Scalar>(negatives: &[FeatureVector<S>]) -> Result<OneShotScorer<S>> {
    if negatives.len() < 2 {
        return Err(AuditError::TooFewSamples {
            needed: 2,
            got: negatives.len(),
        });
    }
    let dim = negatives[0].dimension();
    for n in negatives {
        if n.dimension() != dim {
            return Err(AuditError::DimensionError {
                expected: dim,
                got: n.dimension(),
            });
        }
    }
    let count = S::from_usize(negatives.len()).expect("count representable");
    let negative_mean: Vec<S> = (0..dim)
        .map(|j| sum(negatives.iter().map(|n| n.values()[j])) / count)
        .collect();
    let assumptions = AssumptionBag::new().with("negatives", negatives.len() as f64);
    Ok(OneShotScorer {
        negative_mean,
        assumptions,
    })
}

impl<S: Scalar> OneShotScorer<S> {
    /// Linear model for one positive exemplar, evaluated on `input`.
    fn model_score(&self, positive: &[S], input: &[S]) -> Result<S> {
        let w: Vec<S> = positive
            .iter()
            .zip(&self.negative_mean)
            .map(|(&p, &m)| p - m)
            .collect();
        if w.iter().all(|v| *v == S::zero()) {
            return Err(AuditError::DegenerateModel);
        }
        let midpoint: Vec<S> = positive
            .iter()
            .zip(&self.negative_mean)
            .map(|(&p, &m)| p + m)
            .collect();
        let bias = dot(&w, &midpoint) / S::from_u8(2).expect("2 representable");
        Ok(dot(&w, input) - bias)
    }
}

impl<S: Scalar> Scorer<S> for OneShotScorer<S> {
    fn name(&self) -> &str {
        "one_shot"
    }

    fn polarity(&self) -> Polarity {
        Polarity::Similarity
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn score_pair(&self, probe: &FeatureVector<S>, reference: &FeatureVector<S>) -> Result<S> {
        check_dims(probe, reference)?;
        if probe.dimension() != self.negative_mean.len() {
            return Err(AuditError::DimensionError {
                expected: self.negative_mean.len(),
                got: probe.dimension(),
            });
        }
        let s1 = self.model_score(probe.values(), reference.values())?;
        let s2 = self.model_score(reference.values(), probe.values())?;
        Ok((s1 + s2) / S::from_u8(2).expect("2 representable"))
    }
}

/// Probe-dependent normalization of a base scorer: the base score is
/// z-scored against the band of the probe's base scores to the gallery that
/// fall in [alpha, beta]. Gallery entries bit-equal to the probe are
/// excluded. Population standard deviation keeps 3-point neighborhoods
/// stable.
///
/// Because the normalization statistics follow the probe, the output is
/// asymmetric in general even when the base scorer is symmetric.
pub struct NeighborhoodNormalizedScorer<S: Scalar> {
    base: Box<dyn Scorer<S>>,
    gallery: Vec<FeatureVector<S>>,
    alpha: S,
    beta: S,
    assumptions: AssumptionBag,
}

pub fn neighborhood_normalized_scorer<S: Scalar>(
    base: Box<dyn Scorer<S>>,
    gallery: &Dataset<S>,
    alpha: S,
    beta: S,
) -> Result<NeighborhoodNormalizedScorer<S>> {
    let band_ordered = alpha < beta;
    if !band_ordered {
        return Err(AuditError::ConfigError(format!(
            "alpha must be < beta (got {alpha}, {beta})"
        )));
    }
    if gallery.len() < 3 {
        return Err(AuditError::TooFewSamples {
            needed: 3,
            got: gallery.len(),
        });
    }
    let assumptions = AssumptionBag::new()
        .with("base", base.name())
        .with("alpha", alpha.to_f64().unwrap_or(f64::NEG_INFINITY))
        .with("beta", beta.to_f64().unwrap_or(f64::INFINITY))
        .with("gallery_size", gallery.len() as f64);
    Ok(NeighborhoodNormalizedScorer {
        base,
        gallery: gallery.feature_vectors(),
        alpha,
        beta,
        assumptions,
    })
}

impl<S: Scalar> NeighborhoodNormalizedScorer<S> {
    /// (mean, population std dev) of the probe's score band.
    fn band_stats(&self, probe: &FeatureVector<S>) -> Result<(S, S)> {
        let mut band = Vec::with_capacity(self.gallery.len());
        for member in &self.gallery {
            if member.bits_equal(probe) {
                continue;
            }
            let s = self.base.score_pair(probe, member)?;
            if s >= self.alpha && s <= self.beta {
                band.push(s);
            }
        }
        if band.is_empty() {
            return Err(AuditError::DegenerateNeighborhood("empty score band"));
        }
        let mu = mean(&band).expect("non-empty band");
        let sigma = population_std_dev(&band).expect("non-empty band");
        if sigma == S::zero() {
            return Err(AuditError::DegenerateNeighborhood("zero band spread"));
        }
        Ok((mu, sigma))
    }
}

impl<S: Scalar> Scorer<S> for NeighborhoodNormalizedScorer<S> {
    fn name(&self) -> &str {
        "neighborhood"
    }

    fn polarity(&self) -> Polarity {
        self.base.polarity()
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn score_pair(&self, probe: &FeatureVector<S>, reference: &FeatureVector<S>) -> Result<S> {
        check_dims(probe, reference)?;
        let (mu, sigma) = self.band_stats(probe)?;
        let raw = self.base.score_pair(probe, reference)?;
        Ok((raw - mu) / sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::RawSample;

    fn fv(values: &[f64]) -> FeatureVector<f64> {
        FeatureVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_and_quadratic_form_agree_on_identity_w() {
        let e = euclidean_scorer::<f64>();
        let a = fv(&[0.0, 0.0]);
        let b = fv(&[3.0, 4.0]);
        assert_eq!(e.score_pair(&a, &b).unwrap(), 5.0);

        let w = mahalanobis_w_scorer(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(w.score_pair(&a, &b).unwrap(), 25.0);
        let w_sqrt = mahalanobis_w_scorer(vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            .unwrap()
            .with_sqrt();
        assert_eq!(w_sqrt.score_pair(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn quadratic_form_goes_negative_for_indefinite_w() {
        let w = mahalanobis_w_scorer(vec![vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = w.score_pair(&fv(&[1.0, 0.0]), &fv(&[0.0, 0.0])).unwrap();
        assert_eq!(d, -1.0);
    }

    #[test]
    fn quadratic_form_equals_symmetrized_form() {
        // (a-b)^T W (a-b) only sees the symmetric part of W
        let w = mahalanobis_w_scorer(vec![vec![1.0, 3.0], vec![-1.0, 2.0]]).unwrap();
        let sym = mahalanobis_w_scorer(vec![vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        for (a, b) in [
            ([0.3, -1.2], [2.0, 0.5]),
            ([1.0, 1.0], [0.0, 0.0]),
            ([-4.0, 2.5], [1.5, 1.5]),
        ] {
            let da: f64 = w.score_pair(&fv(&a), &fv(&b)).unwrap();
            let ds: f64 = sym.score_pair(&fv(&a), &fv(&b)).unwrap();
            assert!((da - ds).abs() < 1e-12, "{da} vs {ds}");
        }
    }

    #[test]
    fn sigmoid_wrapper_flips_polarity_and_is_monotone() {
        let raw = mahalanobis_w_scorer(vec![vec![1.0]]).unwrap();
        assert_eq!(Scorer::<f64>::polarity(&raw), Polarity::Dissimilarity);
        let wrapped = mahalanobis_w_scorer(vec![vec![1.0]])
            .unwrap()
            .with_sigmoid(2.0);
        assert_eq!(wrapped.polarity(), Polarity::Similarity);

        let near = wrapped.score_pair(&fv(&[0.0]), &fv(&[0.5])).unwrap();
        let far = wrapped.score_pair(&fv(&[0.0]), &fv(&[3.0])).unwrap();
        assert!(near > far);
        assert!(near > 0.0 && near < 1.0);
    }

    #[test]
    fn cosine_reference_values() {
        let c = cosine_scorer::<f64>(None).unwrap();
        assert_eq!(
            c.score_pair(&fv(&[1.0, 0.0]), &fv(&[2.0, 0.0])).unwrap(),
            1.0
        );
        assert_eq!(
            c.score_pair(&fv(&[1.0, 0.0]), &fv(&[0.0, 1.0])).unwrap(),
            0.0
        );
        assert_eq!(
            c.score_pair(&fv(&[1.0, 0.0]), &fv(&[-1.0, 0.0])).unwrap(),
            -1.0
        );
    }

    #[test]
    fn cosine_rejects_zero_vectors_after_mapping() {
        let c = cosine_scorer::<f64>(None).unwrap();
        assert!(matches!(
            c.score_pair(&fv(&[0.0, 0.0]), &fv(&[1.0, 0.0])),
            Err(AuditError::ZeroVector)
        ));
        // A projection can zero out a nonzero vector
        let proj = cosine_scorer(Some(vec![vec![1.0, 0.0], vec![0.0, 0.0]])).unwrap();
        assert!(matches!(
            proj.score_pair(&fv(&[0.0, 1.0]), &fv(&[1.0, 0.0])),
            Err(AuditError::ZeroVector)
        ));
    }

    #[test]
    fn cosine_linear_map_changes_the_angle() {
        let plain = cosine_scorer::<f64>(None).unwrap();
        let scaled = cosine_scorer(Some(vec![vec![10.0, 0.0], vec![0.0, 0.1]])).unwrap();
        let a = fv(&[1.0, 1.0]);
        let b = fv(&[1.0, -1.0]);
        assert_eq!(plain.score_pair(&a, &b).unwrap(), 0.0);
        // after anisotropic scaling the vectors are nearly parallel
        assert!(scaled.score_pair(&a, &b).unwrap() > 0.99);
    }

    // Hand evaluation of the two one-shot linear models for
    // negatives {(0,1), (0,-1)} (mean (0,0)) and pair ((2,0), (4,0)):
    //   model 1: w = (2,0), bias = (2,0).(2,0)/2 = 2, score of (4,0) = 8-2 = 6
    //   model 2: w = (4,0), bias = (4,0).(4,0)/2 = 8, score of (2,0) = 8-8 = 0
    //   average = 3
    #[test]
    fn one_shot_hand_evaluated_pair() {
        let negatives = [fv(&[0.0, 1.0]), fv(&[0.0, -1.0])];
        let one_shot = one_shot_scorer(&negatives).unwrap();
        assert_eq!(
            one_shot.score_pair(&fv(&[2.0, 0.0]), &fv(&[4.0, 0.0])).unwrap(),
            3.0
        );
    }

    #[test]
    fn one_shot_self_pair_is_nonzero() {
        let negatives = [fv(&[0.0, 1.0]), fv(&[0.0, -1.0])];
        let one_shot = one_shot_scorer(&negatives).unwrap();
        // w = (2,0), bias = 2, score of (2,0) = 4-2 = 2, both models identical
        assert_eq!(
            one_shot.score_pair(&fv(&[2.0, 0.0]), &fv(&[2.0, 0.0])).unwrap(),
            2.0
        );
    }

    #[test]
    fn one_shot_is_symmetric_in_the_pair() {
        let negatives = [fv(&[0.5, 1.0]), fv(&[-0.5, -1.0]), fv(&[1.0, 1.0])];
        let one_shot = one_shot_scorer(&negatives).unwrap();
        let a = fv(&[2.0, -1.0]);
        let b = fv(&[0.25, 3.0]);
        assert_eq!(
            one_shot.score_pair(&a, &b).unwrap(),
            one_shot.score_pair(&b, &a).unwrap()
        );
    }

    #[test]
    fn one_shot_rejects_degenerate_and_underpopulated_negatives() {
        assert!(matches!(
            one_shot_scorer(&[fv(&[0.0, 1.0])]),
            Err(AuditError::TooFewSamples { needed: 2, .. })
        ));
        let negatives = [fv(&[0.0, 1.0]), fv(&[0.0, -1.0])];
        let one_shot = one_shot_scorer(&negatives).unwrap();
        // positive exactly at the negative mean (0,0)
        assert!(matches!(
            one_shot.score_pair(&fv(&[0.0, 0.0]), &fv(&[1.0, 0.0])),
            Err(AuditError::DegenerateModel)
        ));
    }

    fn line_gallery() -> Dataset<f64> {
        Dataset::new(vec![
            RawSample::new(0, 1, vec![0.0]).unwrap(),
            RawSample::new(1, 1, vec![1.0]).unwrap(),
            RawSample::new(2, 2, vec![4.0]).unwrap(),
            RawSample::new(3, 2, vec![6.0]).unwrap(),
        ])
        .unwrap()
    }

    // Oracle for the 1-D gallery {0, 1, 4, 6} with an unbounded band:
    //   probe 0: band {1, 4, 6}, mean 11/3, population sd sqrt(38)/3
    //     score(0 -> 1) = (1 - 11/3) / (sqrt(38)/3) = -1.2977713690461004
    //   probe 1: band {1, 3, 5}, mean 3, population sd sqrt(8/3)
    //     score(1 -> 0) = (1 - 3) / sqrt(8/3)       = -1.2247448713915892
    #[test]
    fn neighborhood_z_scores_match_hand_computed_band_statistics() {
        let scorer = neighborhood_normalized_scorer(
            Box::new(euclidean_scorer::<f64>()),
            &line_gallery(),
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
        .unwrap();

        let oracle = |band: &[f64], raw: f64| -> f64 {
            let mu = band.iter().sum::<f64>() / band.len() as f64;
            let var = band.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / band.len() as f64;
            (raw - mu) / var.sqrt()
        };

        let s01 = scorer.score_pair(&fv(&[0.0]), &fv(&[1.0])).unwrap();
        assert!((s01 - oracle(&[1.0, 4.0, 6.0], 1.0)).abs() < 1e-12);
        assert!((s01 - (-1.2977713690461004)).abs() < 1e-12);

        let s10 = scorer.score_pair(&fv(&[1.0]), &fv(&[0.0])).unwrap();
        assert!((s10 - oracle(&[1.0, 3.0, 5.0], 1.0)).abs() < 1e-12);
        assert!((s10 - (-1.2247448713915892)).abs() < 1e-12);

        assert!(s01 != s10, "probe-dependent normalization is asymmetric");
    }

    #[test]
    fn neighborhood_band_bounds_are_inclusive() {
        let scorer = neighborhood_normalized_scorer(
            Box::new(euclidean_scorer::<f64>()),
            &line_gallery(),
            1.0,
            4.0,
        )
        .unwrap();
        // probe 0: raw scores {1, 4, 6}; band [1, 4] keeps {1, 4}
        let s = scorer.score_pair(&fv(&[0.0]), &fv(&[1.0])).unwrap();
        // mean 2.5, population sd 1.5
        assert!((s - (1.0 - 2.5) / 1.5).abs() < 1e-12);
    }

    #[test]
    fn neighborhood_degenerate_cases() {
        let identical = Dataset::new(vec![
            RawSample::new(0, 1, vec![2.0]).unwrap(),
            RawSample::new(1, 1, vec![2.0]).unwrap(),
            RawSample::new(2, 1, vec![2.0]).unwrap(),
            RawSample::new(3, 1, vec![2.0]).unwrap(),
        ])
        .unwrap();
        let scorer = neighborhood_normalized_scorer(
            Box::new(euclidean_scorer::<f64>()),
            &identical,
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
        .unwrap();
        // probe not in gallery: all base scores equal -> zero spread
        assert!(matches!(
            scorer.score_pair(&fv(&[0.0]), &fv(&[2.0])),
            Err(AuditError::DegenerateNeighborhood(_))
        ));

        let empty_band = neighborhood_normalized_scorer(
            Box::new(euclidean_scorer::<f64>()),
            &line_gallery(),
            100.0,
            200.0,
        )
        .unwrap();
        assert!(matches!(
            empty_band.score_pair(&fv(&[0.0]), &fv(&[1.0])),
            Err(AuditError::DegenerateNeighborhood(_))
        ));

        assert!(matches!(
            neighborhood_normalized_scorer(
                Box::new(euclidean_scorer::<f64>()),
                &line_gallery(),
                2.0,
                1.0,
            ),
            Err(AuditError::ConfigError(_))
        ));
    }

    #[test]
    fn model_scoring_is_nearest_exemplar() {
        let e = euclidean_scorer::<f64>();
        let model = ClassModel::new(1, vec![fv(&[0.0]), fv(&[10.0])]).unwrap();
        assert_eq!(e.score(&fv(&[9.0]), &model).unwrap(), 1.0);

        let c = cosine_scorer::<f64>(None).unwrap();
        let model = ClassModel::new(1, vec![fv(&[1.0, 0.0]), fv(&[0.0, 1.0])]).unwrap();
        assert_eq!(c.score(&fv(&[2.0, 0.0]), &model).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let e = euclidean_scorer::<f64>();
        assert!(matches!(
            e.score_pair(&fv(&[1.0, 2.0]), &fv(&[1.0])),
            Err(AuditError::DimensionError { .. })
        ));
        let w = mahalanobis_w_scorer(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            w.score_pair(&fv(&[1.0, 2.0, 3.0]), &fv(&[1.0, 2.0, 3.0])),
            Err(AuditError::DimensionError { .. })
        ));
    }
}
