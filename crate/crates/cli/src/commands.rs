//! Execution of the five subcommands.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use metric_audit::{
    enumerate_triplets, run_audit_matrix_with_sink, run_audit_with_sink, sample_triplets,
    sample_triplets_iid, stratified_triplets, AuditOptions64, AuditReport64, AxiomName, ClassModel,
    Dataset64, IdentityExtractor, Labeler, MatchPattern, PairInput, ScoreMatrix64, Tolerance64,
    TransformScope, TripletPlan, ViolationRecord,
};
use serde::Serialize;

use crate::config::{AuditRunConfig, Envelope, MetaRunConfig, RecognizeRunConfig};
use crate::scorer_spec::ScorerSpec;
use crate::{AppError, AuditArgs, FormatArg, MetaArgs, PlanArgs, RecognizeArgs, ScopeArg};

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn write_output(path: &str, content: &str) -> Result<(), AppError> {
    if path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(content.as_bytes())
            .map_err(|e| AppError::Other(e.into()))?;
        Ok(())
    } else {
        std::fs::write(path, content).map_err(|e| AppError::Other(e.into()))
    }
}

fn require_readable(path: &Path, what: &str) -> Result<(), AppError> {
    if std::fs::metadata(path).is_err() {
        return Err(AppError::usage(format!(
            "{what} file is not readable: {}",
            path.display()
        )));
    }
    Ok(())
}

/// --seed flag, METRIC_AUDIT_SEED fallback, default 0. The resolved value is
/// recorded in the report for replays.
fn resolve_seed(flag: Option<u64>) -> Result<u64, AppError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("METRIC_AUDIT_SEED") {
        Ok(raw) => raw
            .parse()
            .map_err(|_| AppError::usage(format!("METRIC_AUDIT_SEED is not a u64: {raw:?}"))),
        Err(_) => Ok(0),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TripletsSpec {
    Exhaustive,
    Sample(u64),
    Iid(u64),
    Stratified(u64),
    File(PathBuf),
}

impl TripletsSpec {
    fn parse(raw: &str) -> Result<Self, AppError> {
        if raw == "exhaustive" {
            return Ok(TripletsSpec::Exhaustive);
        }
        if let Some(rest) = raw.strip_prefix("file:") {
            return Ok(TripletsSpec::File(PathBuf::from(rest)));
        }
        for (prefix, build) in [
            ("sample:", TripletsSpec::Sample as fn(u64) -> TripletsSpec),
            ("iid:", TripletsSpec::Iid as fn(u64) -> TripletsSpec),
            (
                "stratified:",
                TripletsSpec::Stratified as fn(u64) -> TripletsSpec,
            ),
        ] {
            if let Some(rest) = raw.strip_prefix(prefix) {
                let m: u64 = rest.parse().map_err(|_| {
                    AppError::usage(format!("bad triple count in --triplets {raw:?}"))
                })?;
                return Ok(build(m));
            }
        }
        Err(AppError::usage(format!(
            "bad --triplets {raw:?}; expected exhaustive, sample:M, iid:M, stratified:M, or file:PATH"
        )))
    }
}

fn parse_strata(raw: &str) -> Result<BTreeMap<MatchPattern, f64>, AppError> {
    let mut map = BTreeMap::new();
    for part in raw.split(',') {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| AppError::usage(format!("bad stratum entry {part:?}")))?;
        let pattern = match name.trim() {
            "all_same" => MatchPattern::AllSame,
            "two_same" => MatchPattern::TwoSame,
            "all_distinct" => MatchPattern::AllDistinct,
            other => {
                return Err(AppError::usage(format!(
                    "unknown stratum {other:?}; expected all_same, two_same, all_distinct"
                )))
            }
        };
        let proportion: f64 = value
            .trim()
            .parse()
            .map_err(|_| AppError::usage(format!("bad proportion in {part:?}")))?;
        map.insert(pattern, proportion);
    }
    Ok(map)
}

fn build_plan(
    spec: &TripletsSpec,
    n: usize,
    labels: Option<Vec<u32>>,
    strata: Option<&str>,
    seed: u64,
) -> Result<TripletPlan, AppError> {
    let plan = match spec {
        TripletsSpec::Exhaustive => enumerate_triplets(n),
        TripletsSpec::Sample(m) => sample_triplets(n, *m, seed),
        TripletsSpec::Iid(m) => sample_triplets_iid(n, *m, seed),
        TripletsSpec::Stratified(m) => {
            let labels = labels.ok_or_else(|| {
                AppError::usage("stratified plans need a dataset with labels (--input)".into())
            })?;
            // uniform thirds unless overridden
            let proportions = match strata {
                Some(raw) => parse_strata(raw)?,
                None => MatchPattern::ALL
                    .into_iter()
                    .map(|p| (p, 1.0 / 3.0))
                    .collect(),
            };
            stratified_triplets(&labels, *m, &proportions, seed)
        }
        TripletsSpec::File(path) => {
            require_readable(path, "plan")?;
            TripletPlan::from_csv_path(path, n)
        }
    };
    plan.map_err(AppError::Runtime)
}

fn run_in_pool<T: Send>(
    workers: usize,
    task: impl FnOnce() -> Result<T, AppError> + Send,
) -> Result<T, AppError> {
    if workers == 0 {
        return task();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::usage(format!("cannot build a {workers}-worker pool: {e}")))?;
    pool.install(task)
}

fn violations_csv_line(record: &ViolationRecord<f64>) -> String {
    let axiom = serde_json::to_value(record.axiom)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let join = |values: Vec<String>| values.join(";");
    format!(
        "{axiom},{},{},{}\n",
        join(record.indices.iter().map(|i| i.to_string()).collect()),
        join(record.values.iter().map(|v| v.to_string()).collect()),
        record.margin
    )
}

pub fn audit(args: &AuditArgs, classify_only: bool) -> Result<i32, AppError> {
    if args.input.is_none() && args.matrix.is_none() {
        return Err(AppError::usage(
            "audit needs --input (dataset CSV) or --matrix (score-matrix CSV)".into(),
        ));
    }
    if args.matrix.is_some() && args.scorer.is_some() {
        return Err(AppError::usage(
            "--matrix and --scorer are mutually exclusive (a matrix already holds its scores)"
                .into(),
        ));
    }
    if args.matrix.is_none() && args.scorer.is_none() {
        return Err(AppError::usage("audit needs --scorer".into()));
    }
    if let Some(path) = &args.input {
        require_readable(path, "dataset")?;
    }
    if let Some(path) = &args.matrix {
        require_readable(path, "matrix")?;
    }

    let dataset = args
        .input
        .as_ref()
        .map(|p| Dataset64::from_csv_path(p).map_err(AppError::Runtime))
        .transpose()?;
    let matrix = args
        .matrix
        .as_ref()
        .map(|p| ScoreMatrix64::from_csv_path(p, "precomputed").map_err(AppError::Runtime))
        .transpose()?;

    let n = match (&matrix, &dataset) {
        (Some(m), _) => m.n(),
        (None, Some(ds)) => ds.len(),
        (None, None) => unreachable!("validated above"),
    };
    let seed = resolve_seed(args.seed)?;
    let spec = TripletsSpec::parse(&args.triplets)?;
    let plan = build_plan(
        &spec,
        n,
        dataset.as_ref().map(|ds| ds.labels()),
        args.strata.as_deref(),
        seed,
    )?;

    let tolerance = Tolerance64::new(args.abs_eps, args.rel_eps).map_err(AppError::Runtime)?;
    let opts = AuditOptions64 {
        bin_width: args.bin_width,
        sample_cap: 100,
        transform_scope: match args.transform_scope {
            ScopeArg::Global => TransformScope::Global,
            ScopeArg::PerTriplet => TransformScope::PerTriplet,
        },
        force_transform: args.force_transform,
    };

    let scorer = args
        .scorer
        .as_ref()
        .map(|raw| ScorerSpec::parse(raw)?.build(dataset.as_ref()))
        .transpose()?;

    let mut violation_lines: Vec<String> = Vec::new();
    let collect_violations = args.violations_csv.is_some();
    let report: AuditReport64 = run_in_pool(args.workers, || {
        let mut sink = |record: &ViolationRecord<f64>| {
            if collect_violations {
                violation_lines.push(violations_csv_line(record));
            }
        };
        let report = match (&matrix, &scorer) {
            (Some(m), None) => run_audit_matrix_with_sink(
                m,
                dataset.as_ref(),
                &plan,
                &tolerance,
                Some(seed),
                &opts,
                &mut sink,
            ),
            (None, Some(s)) => run_audit_with_sink(
                s.as_ref(),
                dataset.as_ref().expect("validated above"),
                &plan,
                &tolerance,
                Some(seed),
                &opts,
                &mut sink,
            ),
            _ => unreachable!("validated above"),
        };
        report.map_err(AppError::Runtime)
    })?;

    if let Some(path) = &args.violations_csv {
        let mut text = String::from("axiom,indices,values,margin\n");
        for line in &violation_lines {
            text.push_str(line);
        }
        std::fs::write(path, text).map_err(|e| AppError::Other(e.into()))?;
    }
    if let Some(path) = &args.curve_csv {
        let csv = report
            .curve_to_csv_string()
            .ok_or_else(|| AppError::usage("no curve available".into()))?;
        std::fs::write(path, csv).map_err(|e| AppError::Other(e.into()))?;
    }
    if let Some(path) = &args.histogram_csv {
        let csv = report
            .symmetry_histogram
            .as_ref()
            .ok_or_else(|| AppError::usage("no histogram available".into()))?
            .to_csv_string();
        std::fs::write(path, csv).map_err(|e| AppError::Other(e.into()))?;
    }

    let report = if classify_only {
        report.without_plots()
    } else {
        report
    };

    let violations_total: u64 = AxiomName::ALL
        .into_iter()
        .map(|name| report.axiom(name).violations)
        .sum();

    let config = AuditRunConfig {
        command: if classify_only { "classify" } else { "audit" }.to_string(),
        input: args.input.as_ref().map(|p| p.display().to_string()),
        matrix: args.matrix.as_ref().map(|p| p.display().to_string()),
        scorer: args.scorer.clone(),
        triplets: args.triplets.clone(),
        strata: args.strata.clone(),
        seed,
        abs_eps: args.abs_eps,
        rel_eps: args.rel_eps,
        bin_width: args.bin_width,
        transform_scope: match args.transform_scope {
            ScopeArg::Global => "global",
            ScopeArg::PerTriplet => "per_triplet",
        }
        .to_string(),
        force_transform: args.force_transform,
        fail_on_violation: args.fail_on_violation,
        output: args.output.clone(),
    };
    let envelope = Envelope {
        timestamp: timestamp(),
        config,
        report,
    };
    let json = serde_json::to_string_pretty(&envelope).map_err(|e| AppError::Other(e.into()))?;
    write_output(&args.output, &format!("{json}\n"))?;

    Ok(if args.fail_on_violation && violations_total > 0 {
        1
    } else {
        0
    })
}

#[derive(Serialize)]
struct RecognitionOutcome {
    probe_id: u64,
    labels: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    class_scores: BTreeMap<u32, f64>,
}

#[derive(Serialize)]
struct RecognitionReport {
    mode: String,
    scorer_assumptions: metric_audit::AssumptionBag,
    labeler_assumptions: metric_audit::AssumptionBag,
    results: Vec<RecognitionOutcome>,
}

pub fn recognize(args: &RecognizeArgs) -> Result<i32, AppError> {
    require_readable(&args.gallery, "gallery")?;
    require_readable(&args.probe, "probe")?;
    let gallery = Dataset64::from_csv_path(&args.gallery).map_err(AppError::Runtime)?;
    let probes = Dataset64::from_csv_path(&args.probe).map_err(AppError::Runtime)?;

    let scorer = ScorerSpec::parse(&args.scorer)?.build(Some(&gallery))?;
    let mut labeler = Labeler::<f64>::new(args.k).map_err(AppError::Runtime)?;
    if let Some(tau) = args.threshold {
        labeler = labeler.with_threshold(tau);
    }
    let extractor = IdentityExtractor::new();
    let models =
        ClassModel::models_from_dataset(&gallery, &extractor).map_err(AppError::Runtime)?;

    let class_scores =
        |probe: &metric_audit::FeatureVector<f64>| -> Result<BTreeMap<u32, f64>, AppError> {
            let mut best: BTreeMap<u32, f64> = BTreeMap::new();
            for model in &models {
                let s = scorer.score(probe, model).map_err(AppError::Runtime)?;
                best.entry(model.class_label())
                    .and_modify(|b| {
                        let better = match scorer.polarity() {
                            metric_audit::Polarity::Similarity => s > *b,
                            metric_audit::Polarity::Dissimilarity => s < *b,
                        };
                        if better {
                            *b = s;
                        }
                    })
                    .or_insert(s);
            }
            Ok(best)
        };

    let mut results = Vec::new();
    match args.mode.as_str() {
        "pair" => {
            if probes.len() < 2 {
                return Err(AppError::usage(
                    "pair mode needs at least two probe rows (the pair halves)".into(),
                ));
            }
            let claimed = args.claimed_class.unwrap_or(1);
            let model = models
                .iter()
                .find(|m| m.class_label() == claimed)
                .ok_or_else(|| {
                    AppError::usage(format!("gallery has no class {claimed} for the pair model"))
                })?;
            let vectors = probes.feature_vectors();
            let pair = PairInput::new(&vectors[0], &vectors[1]).map_err(AppError::Runtime)?;
            let label = metric_audit::run_pair_matching(&pair, model, scorer.as_ref(), &labeler)
                .map_err(AppError::Runtime)?;
            let score = scorer
                .score_pair(&vectors[0], &vectors[1])
                .map_err(AppError::Runtime)?;
            results.push(RecognitionOutcome {
                probe_id: probes.samples()[0].id(),
                labels: vec![label],
                score: Some(score),
                class_scores: BTreeMap::new(),
            });
        }
        "verify" => {
            let claimed = args
                .claimed_class
                .ok_or_else(|| AppError::usage("verify mode needs --claimed-class".into()))?;
            // one single-exemplar view per gallery sample of the claimed class
            let views: Vec<ClassModel<f64>> = gallery
                .samples()
                .iter()
                .filter(|s| s.label() == claimed)
                .map(|s| {
                    ClassModel::new(
                        claimed,
                        vec![metric_audit::FeatureVector::new(s.values().to_vec()).unwrap()],
                    )
                    .unwrap()
                })
                .collect();
            if views.is_empty() {
                return Err(AppError::usage(format!(
                    "gallery has no samples with the claimed class {claimed}"
                )));
            }
            for (sample, probe) in probes.samples().iter().zip(probes.feature_vectors()) {
                let label = metric_audit::run_verification(
                    &probe,
                    claimed,
                    &views,
                    scorer.as_ref(),
                    &labeler,
                )
                .map_err(AppError::Runtime)?;
                results.push(RecognitionOutcome {
                    probe_id: sample.id(),
                    labels: vec![label],
                    score: None,
                    class_scores: BTreeMap::new(),
                });
            }
        }
        "identify" => {
            for (sample, probe) in probes.samples().iter().zip(probes.feature_vectors()) {
                let label =
                    metric_audit::run_identification(&probe, &models, scorer.as_ref(), &labeler)
                        .map_err(AppError::Runtime)?;
                results.push(RecognitionOutcome {
                    probe_id: sample.id(),
                    labels: vec![label],
                    score: None,
                    class_scores: class_scores(&probe)?,
                });
            }
        }
        "search" => {
            for (sample, probe) in probes.samples().iter().zip(probes.feature_vectors()) {
                let labels = metric_audit::run_search(&probe, &models, scorer.as_ref(), &labeler)
                    .map_err(AppError::Runtime)?;
                results.push(RecognitionOutcome {
                    probe_id: sample.id(),
                    labels,
                    score: None,
                    class_scores: class_scores(&probe)?,
                });
            }
        }
        other => {
            return Err(AppError::usage(format!(
                "unknown mode {other:?}; expected pair, verify, identify, search"
            )))
        }
    }

    let config = RecognizeRunConfig {
        command: "recognize".to_string(),
        mode: args.mode.clone(),
        gallery: args.gallery.display().to_string(),
        probe: args.probe.display().to_string(),
        scorer: args.scorer.clone(),
        k: args.k,
        threshold: args.threshold,
        claimed_class: args.claimed_class,
        output: args.output.clone(),
    };
    let report = RecognitionReport {
        mode: args.mode.clone(),
        scorer_assumptions: scorer.assumptions().clone(),
        labeler_assumptions: labeler.assumptions().clone(),
        results,
    };
    let envelope = Envelope {
        timestamp: timestamp(),
        config,
        report,
    };
    let json = serde_json::to_string_pretty(&envelope).map_err(|e| AppError::Other(e.into()))?;
    write_output(&args.output, &format!("{json}\n"))?;
    Ok(0)
}

pub fn plan(args: &PlanArgs) -> Result<i32, AppError> {
    if let Some(path) = &args.import {
        require_readable(path, "plan")?;
        let n = match (args.n, &args.labels_from) {
            (Some(n), _) => n,
            (None, Some(labels_path)) => {
                require_readable(labels_path, "dataset")?;
                Dataset64::from_csv_path(labels_path)
                    .map_err(AppError::Runtime)?
                    .len()
            }
            (None, None) => {
                return Err(AppError::usage(
                    "--import needs --n (or --labels-from) to validate indices".into(),
                ))
            }
        };
        let plan = TripletPlan::from_csv_path(path, n).map_err(AppError::Runtime)?;
        let csv = plan.to_csv_string().map_err(AppError::Runtime)?;
        write_output(&args.output, &csv)?;
        return Ok(0);
    }

    let labels = args
        .labels_from
        .as_ref()
        .map(|p| -> Result<Vec<u32>, AppError> {
            require_readable(p, "dataset")?;
            Ok(Dataset64::from_csv_path(p)
                .map_err(AppError::Runtime)?
                .labels())
        })
        .transpose()?;
    let n = match (args.n, &labels) {
        (Some(n), _) => n,
        (None, Some(l)) => l.len(),
        (None, None) => return Err(AppError::usage("plan needs --n or --labels-from".into())),
    };
    let seed = resolve_seed(args.seed)?;
    let spec = TripletsSpec::parse(&args.triplets)?;
    if matches!(spec, TripletsSpec::File(_)) {
        return Err(AppError::usage(
            "use --import to re-emit an existing plan file".into(),
        ));
    }
    let plan = build_plan(&spec, n, labels, args.strata.as_deref(), seed)?;
    let csv = plan.to_csv_string().map_err(AppError::Runtime)?;
    write_output(&args.output, &csv)?;
    Ok(0)
}

pub fn meta(args: &MetaArgs) -> Result<i32, AppError> {
    let tag = metric_audit::meta::DatasetTag::parse(&args.dataset).ok_or_else(|| {
        AppError::usage(format!(
            "unknown dataset {:?}; expected LFW, Caltech15, Caltech30",
            args.dataset
        ))
    })?;
    let records = match &args.input {
        Some(path) => {
            require_readable(path, "results")?;
            metric_audit::meta::ingest_results_path(path).map_err(AppError::Runtime)?
        }
        None => metric_audit::meta::bundled::records_for(tag),
    };
    let summary = metric_audit::meta::summarize(&records, tag).map_err(AppError::Runtime)?;

    match args.format {
        FormatArg::Json => {
            let config = MetaRunConfig {
                command: "meta".to_string(),
                dataset: args.dataset.clone(),
                input: args.input.as_ref().map(|p| p.display().to_string()),
                format: "json".to_string(),
                output: args.output.clone(),
            };
            let envelope = Envelope {
                timestamp: timestamp(),
                config,
                report: summary,
            };
            let json =
                serde_json::to_string_pretty(&envelope).map_err(|e| AppError::Other(e.into()))?;
            write_output(&args.output, &format!("{json}\n"))?;
        }
        FormatArg::Csv => {
            write_output(&args.output, &summary.to_csv_string())?;
        }
    }
    Ok(0)
}
