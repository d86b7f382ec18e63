//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::process::Command;
use std::time::Instant;

use metric_audit::dataset::AssumptionBag;
use metric_audit::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn tol() -> Tolerance<f64> {
    Tolerance::default()
}

fn opts() -> AuditOptions<f64> {
    AuditOptions::default()
}

/// Criterion 1: the bundled tables reproduce the published best-accuracy
/// numbers and gaps exactly to 0.01, in under a second.
#[test]
fn acceptance_1_meta_reproduction() {
    let started = Instant::now();
    let cases = [
        (meta::DatasetTag::Lfw, 85.65, 93.30, 7.65),
        (meta::DatasetTag::Caltech15, 73.70, 74.70, 1.00),
        (meta::DatasetTag::Caltech30, 72.60, 84.30, 11.70),
    ];
    for (tag, best_metric, best_nonmetric, gap) in cases {
        let records = meta::bundled::records_for(tag);
        let summary = meta::summarize(&records, tag).unwrap();
        assert!(
            (summary.best_metric.unwrap() - best_metric).abs() <= 0.01,
            "{tag:?} best_metric {:?}",
            summary.best_metric
        );
        assert!(
            (summary.best_nonmetric.unwrap() - best_nonmetric).abs() <= 0.01,
            "{tag:?} best_nonmetric {:?}",
            summary.best_nonmetric
        );
        assert!(
            (summary.gap.unwrap() - gap).abs() <= 0.01,
            "{tag:?} gap {:?}",
            summary.gap
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("ACCEPTANCE 1 (meta reproduction): PASS ({elapsed:?})");
}

/// Criterion 2: an exhaustive Euclidean audit of 30 random 5-D points
/// classifies metric with zero violations on every axiom, in under 5 s.
#[test]
fn acceptance_2_euclidean_soundness() {
    let started = Instant::now();
    for seed in [1u64, 42, 20260810] {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let samples: Vec<RawSample<f64>> = (0..30)
            .map(|i| {
                let values: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
                RawSample::new(i, 1 + (i % 4) as u32, values).unwrap()
            })
            .collect();
        let ds = Dataset::new(samples).unwrap();
        let plan = enumerate_triplets(30).unwrap();
        let report = run_audit(
            &euclidean_scorer::<f64>(),
            &ds,
            &plan,
            &tol(),
            Some(seed),
            &opts(),
        )
        .unwrap();
        assert_eq!(
            report.classification,
            ClassificationLabel::Metric,
            "seed {seed}"
        );
        for name in AxiomName::ALL {
            assert_eq!(report.axiom(name).violations, 0, "seed {seed} {name:?}");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("ACCEPTANCE 2 (euclidean soundness): PASS ({elapsed:?})");
}

/// Criterion 3: cosine dissimilarity on the fixture vectors fails exactly
/// {identity, triangle} with symmetry (and non-negativity) passing.
#[test]
fn acceptance_3_cosine_failure_set() {
    let ds = fixtures::cosine_vectors();
    let plan = enumerate_triplets(ds.len()).unwrap();
    let scorer = cosine_scorer::<f64>(None).unwrap();
    let report = run_audit(&scorer, &ds, &plan, &tol(), None, &opts()).unwrap();

    assert_eq!(report.axiom(AxiomName::Symmetry).violations, 0);
    assert_eq!(report.axiom(AxiomName::NonNegativity).violations, 0);
    assert!(report.axiom(AxiomName::Identity).violations > 0);
    assert!(report.axiom(AxiomName::Triangle).violations > 0);
    assert_eq!(
        report.classification,
        ClassificationLabel::Nonmetric(vec![AxiomName::Identity, AxiomName::Triangle]),
        "failure set must be exactly {{identity, triangle}}"
    );
    println!("ACCEPTANCE 3 (cosine failure set = identity + triangle): PASS");
}

/// Criterion 4: probe-dependent neighborhood normalization over the 1-D
/// fixture produces a symmetry violation beyond 0.05 and histogram mass off
/// the zero bin.
#[test]
fn acceptance_4_neighborhood_asymmetry() {
    let ds = fixtures::line0146();
    let scorer = neighborhood_normalized_scorer(
        Box::new(euclidean_scorer::<f64>()),
        &ds,
        f64::NEG_INFINITY,
        f64::INFINITY,
    )
    .unwrap();
    let plan = enumerate_triplets(ds.len()).unwrap();
    let report = run_audit(&scorer, &ds, &plan, &tol(), None, &opts()).unwrap();

    let symmetry = report.axiom(AxiomName::Symmetry);
    assert!(symmetry.violations >= 1);
    let max_delta = symmetry
        .samples
        .iter()
        .map(|r| r.margin)
        .fold(0.0f64, f64::max);
    assert!(max_delta > 0.05, "largest |delta| {max_delta}");

    let histogram = report.symmetry_histogram.as_ref().unwrap();
    assert!(histogram.mass_off_zero_bin() > 0);
    println!("ACCEPTANCE 4 (neighborhood asymmetry, |delta| = {max_delta:.4}): PASS");
}

/// Criterion 5: squared Euclidean on {0,1,2} and cosine dissimilarity on the
/// 0/60/120-degree vectors violate the triangle inequality with margins
/// exactly 2.0 and 0.5 (tolerance 1e-9).
#[test]
fn acceptance_5_triangle_margins() {
    let plan = enumerate_triplets(3).unwrap();

    let report = run_audit(
        &squared_euclidean_scorer::<f64>(),
        &fixtures::line012(),
        &plan,
        &tol(),
        None,
        &opts(),
    )
    .unwrap();
    let triangle = report.axiom(AxiomName::Triangle);
    assert!(triangle.violations >= 1);
    let margin_sq = triangle.samples[0].margin;
    assert!(margin_sq >= 0.5);
    assert!((margin_sq - 2.0).abs() <= 1e-9, "margin {margin_sq}");

    let scorer = cosine_scorer::<f64>(None).unwrap();
    let report = run_audit(
        &scorer,
        &fixtures::angle_vectors(),
        &plan,
        &tol(),
        None,
        &opts(),
    )
    .unwrap();
    let triangle = report.axiom(AxiomName::Triangle);
    assert!(triangle.violations >= 1);
    let margin_cos = triangle.samples[0].margin;
    assert!(margin_cos >= 0.5 - 1e-9);
    assert!((margin_cos - 0.5).abs() <= 1e-9, "margin {margin_cos}");

    println!("ACCEPTANCE 5 (triangle margins {margin_sq:.12} and {margin_cos:.12}): PASS");
}

/// Criterion 6: for n = 20 and the cosine scorer, the violation rate over
/// 5000 i.i.d. sampled triples lands within 3 binomial standard errors of
/// the exhaustive rate in at least 95 of 100 seeds, in under 30 s.
#[test]
fn acceptance_6_sampling_estimator() {
    let started = Instant::now();
    let ds = fixtures::points20();
    let scorer = cosine_scorer::<f64>(None).unwrap();
    let raw = build_score_matrix(&scorer, &ds).unwrap();
    let matrix = transform_smaller_is_better(&raw).unwrap();
    let dissimilarity = matrix.matrix();

    let exhaustive =
        triangle_tally(dissimilarity, &enumerate_triplets(20).unwrap(), &tol()).unwrap();
    let p = exhaustive.violating_triples as f64 / exhaustive.triples as f64;
    assert!(
        p > 0.0 && p < 1.0,
        "fixture must have an interior rate, got {p}"
    );

    let m = 5000u64;
    let se = (p * (1.0 - p) / m as f64).sqrt();
    let band = 3.0 * se;
    let mut hits = 0;
    for seed in 0..100u64 {
        let plan = sample_triplets_iid(20, m, seed).unwrap();
        let tally = triangle_tally(dissimilarity, &plan, &tol()).unwrap();
        let rate = tally.violating_triples as f64 / tally.triples as f64;
        if (rate - p).abs() <= band {
            hits += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(
        hits >= 95,
        "only {hits}/100 seeds within 3 SE (p = {p}, band = {band})"
    );
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 6 (sampling estimator, {hits}/100 seeds within 3 SE of rate {p:.4}): PASS ({elapsed:?})"
    );
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_metric-audit"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8(output.stdout).expect("utf8 stdout"),
    )
}

fn strip_timestamp(report: &str) -> String {
    let mut value: serde_json::Value = serde_json::from_str(report).expect("valid JSON report");
    value["timestamp"] = serde_json::Value::Null;
    serde_json::to_string_pretty(&value).unwrap()
}

/// Criterion 7: identical run configuration produces byte-identical reports
/// (timestamp aside) for worker counts 1 and 8.
#[test]
fn acceptance_7_determinism_across_workers() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/points20.csv");
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let (code, stdout) = run_cli(&[
            "audit",
            "--input",
            fixture,
            "--scorer",
            "cosine",
            "--triplets",
            "sample:400",
            "--seed",
            "42",
            "--workers",
            workers,
        ]);
        assert_eq!(code, 0, "audit failed under workers={workers}");
        outputs.push(strip_timestamp(&stdout));
    }
    assert_eq!(outputs[0], outputs[1], "worker count changed report bytes");
    println!("ACCEPTANCE 7 (byte-identical reports for workers 1 and 8): PASS");
}

/// Strictly increasing score map applied on top of Euclidean distances.
struct MonotoneWrapped {
    inner: recognition::EuclideanScorer,
    map: fn(f64) -> f64,
    assumptions: AssumptionBag,
}

impl Scorer<f64> for MonotoneWrapped {
    fn name(&self) -> &str {
        "monotone_wrapped"
    }

    fn polarity(&self) -> Polarity {
        Scorer::<f64>::polarity(&self.inner)
    }

    fn assumptions(&self) -> &AssumptionBag {
        &self.assumptions
    }

    fn score_pair(
        &self,
        probe: &FeatureVector<f64>,
        reference: &FeatureVector<f64>,
    ) -> Result<f64> {
        Ok((self.map)(self.inner.score_pair(probe, reference)?))
    }
}

fn random_instance(rng: &mut ChaCha12Rng) -> (FeatureVector<f64>, Vec<ClassModel<f64>>) {
    let dim = rng.gen_range(1..=4);
    let classes = rng.gen_range(2..=6);
    let models: Vec<ClassModel<f64>> = (1..=classes)
        .map(|label| {
            let exemplars = rng.gen_range(1..=3);
            let set: Vec<FeatureVector<f64>> = (0..exemplars)
                .map(|_| {
                    FeatureVector::new((0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect())
                        .unwrap()
                })
                .collect();
            ClassModel::new(label, set).unwrap()
        })
        .collect();
    let probe = FeatureVector::new((0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()).unwrap();
    (probe, models)
}

/// Criterion 8: run_search(k = 1) equals run_identification on 1000
/// randomized instances, and both are invariant under 5 strictly increasing
/// score transforms (with the threshold remapped through the same function).
#[test]
fn acceptance_8_recognition_mode_consistency() {
    let mut rng = ChaCha12Rng::seed_from_u64(777);
    let scorer = euclidean_scorer::<f64>();

    for i in 0..1000 {
        let (probe, models) = random_instance(&mut rng);
        let tau = if i % 2 == 0 { Some(5.0) } else { None };
        let mut labeler = Labeler::new(1).unwrap();
        if let Some(t) = tau {
            labeler = labeler.with_threshold(t);
        }
        let ident = run_identification(&probe, &models, &scorer, &labeler).unwrap();
        let search = run_search(&probe, &models, &scorer, &labeler).unwrap();
        assert_eq!(search, vec![ident], "instance {i}");
    }

    let transforms: [fn(f64) -> f64; 5] = [
        |x| 2.5 * x + 1.0,
        |x| x + x * x * x,
        |x| x.atan(),
        |x| (x / 20.0).exp(),
        |x| x.asinh(),
    ];
    let tau = 5.0f64;
    for (t_index, map) in transforms.into_iter().enumerate() {
        let wrapped = MonotoneWrapped {
            inner: euclidean_scorer::<f64>(),
            map,
            assumptions: AssumptionBag::new(),
        };
        let mut rng = ChaCha12Rng::seed_from_u64(1000 + t_index as u64);
        for i in 0..200 {
            let (probe, models) = random_instance(&mut rng);

            let base_labeler = Labeler::new(1).unwrap().with_threshold(tau);
            let mapped_labeler = Labeler::new(1).unwrap().with_threshold(map(tau));
            assert_eq!(
                run_identification(&probe, &models, &scorer, &base_labeler).unwrap(),
                run_identification(&probe, &models, &wrapped, &mapped_labeler).unwrap(),
                "identification invariance failed (transform {t_index}, instance {i})"
            );

            let k = models.len().min(3);
            let search_labeler = Labeler::new(k).unwrap();
            assert_eq!(
                run_search(&probe, &models, &scorer, &search_labeler).unwrap(),
                run_search(&probe, &models, &wrapped, &search_labeler).unwrap(),
                "search invariance failed (transform {t_index}, instance {i})"
            );
        }
    }
    println!("ACCEPTANCE 8 (search/identification consistency + argmax invariance): PASS");
}
