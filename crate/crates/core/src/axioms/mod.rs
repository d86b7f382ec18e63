//! The four metric-axiom checks, function classification, and the audit
//! driver that ties matrix construction, the smaller-is-better transform,
//! sampling plans, and reporting together.

pub mod report;

pub use report::{
    wilson_interval, AuditReport, AxiomName, AxiomResult, ClassificationLabel, Histogram,
    HistogramBin, Tolerance, TransformInfo, TransformScope, ViolationAxiom, ViolationRecord,
};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{AuditError, Result};
use crate::matrix::{
    build_score_matrix, transform_smaller_is_better, transform_smaller_is_better_forced, Polarity,
    ScoreMatrix,
};
use crate::recognition::Scorer;
use crate::sampling::TripletPlan;
use crate::scalar::Scalar;

/// Reports keep at most this many violation records per axiom; the full
/// stream is available through a [`ViolationSink`].
pub const DEFAULT_SAMPLE_CAP: usize = 100;

/// Receives every violation record as checks produce them, in deterministic
/// order (non-negativity, identity, symmetry, then triangle in plan order).
pub trait ViolationSink<S: Scalar> {
    fn record(&mut self, record: &ViolationRecord<S>);
}

/// Sink that drops everything.
pub struct NoopSink;

impl<S: Scalar> ViolationSink<S> for NoopSink {
    fn record(&mut self, _record: &ViolationRecord<S>) {}
}

impl<S: Scalar, F: FnMut(&ViolationRecord<S>)> ViolationSink<S> for F {
    fn record(&mut self, record: &ViolationRecord<S>) {
        self(record)
    }
}

/// Audit knobs beyond the tolerance.
#[derive(Debug, Clone)]
pub struct AuditOptions<S: Scalar> {
    /// Bin width of the symmetry-difference histogram.
    pub bin_width: S,
    /// Cap on stored violation records per axiom.
    pub sample_cap: usize,
    /// Anchoring of the smaller-is-better transform (triangle checks only).
    pub transform_scope: TransformScope,
    /// Apply the transform even to a dissimilarity matrix.
    pub force_transform: bool,
}

impl<S: Scalar> Default for AuditOptions<S> {
    fn default() -> Self {
        Self {
            bin_width: S::from_f64(0.01).expect("0.01 representable"),
            sample_cap: DEFAULT_SAMPLE_CAP,
            transform_scope: TransformScope::Global,
            force_transform: false,
        }
    }
}

fn require_dissimilarity<S: Scalar>(matrix: &ScoreMatrix<S>) -> Result<()> {
    if matrix.polarity() != Polarity::Dissimilarity {
        return Err(AuditError::PolarityError {
            expected: "dissimilarity",
            got: matrix.polarity().as_str(),
        });
    }
    Ok(())
}

/// Property 1: d(x, y) >= 0. One check per ordered entry, diagonal included.
pub fn check_non_negativity<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    tol: &Tolerance<S>,
) -> Result<AxiomResult<S>> {
    require_dissimilarity(matrix)?;
    Ok(check_non_negativity_inner(
        matrix,
        tol,
        DEFAULT_SAMPLE_CAP,
        &mut NoopSink,
    ))
}

fn check_non_negativity_inner<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    tol: &Tolerance<S>,
    cap: usize,
    sink: &mut dyn ViolationSink<S>,
) -> AxiomResult<S> {
    let n = matrix.n();
    let mut violations = 0u64;
    let mut samples = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let d = matrix.entry(i, j);
            if tol.exceeds(S::zero(), d) {
                violations += 1;
                let record = ViolationRecord {
                    axiom: ViolationAxiom::NonNegativity,
                    indices: vec![i, j],
                    values: vec![d],
                    margin: -d,
                };
                sink.record(&record);
                if samples.len() < cap {
                    samples.push(record);
                }
            }
        }
    }
    AxiomResult::from_records((n * n) as u64, violations, samples, cap)
}

/// Property 2: d(x, y) = 0 iff x = y, audited as two sub-checks.
///
/// (a) identity_self: every diagonal entry must be zero within tolerance.
/// (b) identity_distinct: an unordered pair of samples with distinct feature
/// vectors must not score zero in either direction. Pairs whose vectors are
/// bit-for-bit equal are exempt (dataset duplicates are not the function's
/// fault) and excluded from the checked count.
pub fn check_identity<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    dataset: &Dataset<S>,
    tol: &Tolerance<S>,
) -> Result<AxiomResult<S>> {
    require_dissimilarity(matrix)?;
    if dataset.len() != matrix.n() {
        return Err(AuditError::DimensionError {
            expected: matrix.n(),
            got: dataset.len(),
        });
    }
    Ok(check_identity_inner(
        matrix,
        Some(dataset),
        tol,
        DEFAULT_SAMPLE_CAP,
        &mut NoopSink,
    ))
}

/// Identity check without a dataset: no duplicate exemption is possible, so
/// every off-diagonal pair is treated as distinct. Used for precomputed
/// matrices.
pub fn check_identity_unexempted<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    tol: &Tolerance<S>,
) -> Result<AxiomResult<S>> {
    require_dissimilarity(matrix)?;
    Ok(check_identity_inner(
        matrix,
        None,
        tol,
        DEFAULT_SAMPLE_CAP,
        &mut NoopSink,
    ))
}

fn check_identity_inner<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    dataset: Option<&Dataset<S>>,
    tol: &Tolerance<S>,
    cap: usize,
    sink: &mut dyn ViolationSink<S>,
) -> AxiomResult<S> {
    let n = matrix.n();
    let features = dataset.map(|ds| ds.feature_vectors());
    let mut checked = 0u64;
    let mut violations = 0u64;
    let mut samples = Vec::new();
    let mut push = |record: ViolationRecord<S>, samples: &mut Vec<ViolationRecord<S>>| {
        sink.record(&record);
        if samples.len() < cap {
            samples.push(record);
        }
    };

    for i in 0..n {
        checked += 1;
        let d = matrix.entry(i, i);
        if !tol.equal_within(d, S::zero()) {
            violations += 1;
            push(
                ViolationRecord {
                    axiom: ViolationAxiom::IdentitySelf,
                    indices: vec![i],
                    values: vec![d],
                    margin: d.abs(),
                },
                &mut samples,
            );
        }
    }

    for i in 0..n {
        for j in (i + 1)..n {
            if let Some(features) = &features {
                if features[i].bits_equal(&features[j]) {
                    continue; // duplicate samples are exempt
                }
            }
            checked += 1;
            let fwd = matrix.entry(i, j);
            let bwd = matrix.entry(j, i);
            let zero_fwd = tol.equal_within(fwd, S::zero());
            let zero_bwd = tol.equal_within(bwd, S::zero());
            if zero_fwd || zero_bwd {
                violations += 1;
                let closest = if zero_fwd && (!zero_bwd || fwd.abs() <= bwd.abs()) {
                    fwd
                } else {
                    bwd
                };
                let slack = tol.slack(closest, S::zero());
                let margin = slack - closest.abs();
                let margin = if margin > S::zero() {
                    margin
                } else {
                    S::min_positive_value()
                };
                push(
                    ViolationRecord {
                        axiom: ViolationAxiom::IdentityDistinct,
                        indices: vec![i, j],
                        values: vec![fwd, bwd],
                        margin,
                    },
                    &mut samples,
                );
            }
        }
    }
    AxiomResult::from_records(checked, violations, samples, cap)
}

/// Property 3: d(x, y) = d(y, x). One check per unordered pair; the
/// histogram bins every difference d(i,j) - d(j,i), zeros included.
pub fn check_symmetry<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    tol: &Tolerance<S>,
    bin_width: S,
) -> Result<(AxiomResult<S>, Histogram<S>)> {
    let bin_width_valid = bin_width.is_finite() && bin_width > S::zero();
    if !bin_width_valid {
        return Err(AuditError::ConfigError(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    Ok(check_symmetry_inner(
        matrix,
        tol,
        bin_width,
        DEFAULT_SAMPLE_CAP,
        &mut NoopSink,
    ))
}

fn check_symmetry_inner<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    tol: &Tolerance<S>,
    bin_width: S,
    cap: usize,
    sink: &mut dyn ViolationSink<S>,
) -> (AxiomResult<S>, Histogram<S>) {
    let n = matrix.n();
    let mut deltas = Vec::with_capacity(n * (n - 1) / 2);
    let mut violations = 0u64;
    let mut samples = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let fwd = matrix.entry(i, j);
            let bwd = matrix.entry(j, i);
            let delta = fwd - bwd;
            deltas.push(delta);
            if !tol.equal_within(fwd, bwd) {
                violations += 1;
                let record = ViolationRecord {
                    axiom: ViolationAxiom::Symmetry,
                    indices: vec![i, j],
                    values: vec![fwd, bwd],
                    margin: delta.abs(),
                };
                sink.record(&record);
                if samples.len() < cap {
                    samples.push(record);
                }
            }
        }
    }
    let checked = deltas.len() as u64;
    (
        AxiomResult::from_records(checked, violations, samples, cap),
        Histogram::build(deltas.into_iter(), bin_width),
    )
}

/// Is the matrix symmetric within tolerance? Decides whether triangle
/// checks need 3 or 6 inequalities per triple.
pub fn is_symmetric_within<S: Scalar>(matrix: &ScoreMatrix<S>, tol: &Tolerance<S>) -> bool {
    let n = matrix.n();
    for i in 0..n {
        for j in (i + 1)..n {
            if !tol.equal_within(matrix.entry(i, j), matrix.entry(j, i)) {
                return false;
            }
        }
    }
    true
}

/// Per-triple and per-inequality triangle counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TriangleTally {
    pub triples: u64,
    pub violating_triples: u64,
    pub inequalities: u64,
    pub violating_inequalities: u64,
}

/// What the triangle checker reads distances from.
#[derive(Clone, Copy)]
enum TriangleView<'a, S: Scalar> {
    /// Entries of an already-dissimilarity matrix.
    Direct(&'a ScoreMatrix<S>),
    /// Raw similarity entries re-anchored per triple:
    /// d(a,b) = (max raw score within the triple) - raw(a,b).
    PerTriplet(&'a ScoreMatrix<S>),
}

struct TripleEval<S: Scalar> {
    checked: u32,
    violated: u32,
    records: Vec<ViolationRecord<S>>,
}

fn eval_triple<S: Scalar>(
    view: TriangleView<'_, S>,
    triple: [usize; 3],
    tol: &Tolerance<S>,
    symmetric: bool,
) -> TripleEval<S> {
    let [x, y, z] = triple;
    let d: Box<dyn Fn(usize, usize) -> S> = match view {
        TriangleView::Direct(m) => Box::new(move |a, b| m.entry(a, b)),
        TriangleView::PerTriplet(raw) => {
            let ordered = [(x, y), (y, x), (x, z), (z, x), (y, z), (z, y)];
            let s_max = ordered
                .iter()
                .map(|&(a, b)| raw.entry(a, b))
                .fold(S::neg_infinity(), |acc, v| if v > acc { v } else { acc });
            Box::new(move |a, b| s_max - raw.entry(a, b))
        }
    };

    let mut eval = TripleEval {
        checked: 0,
        violated: 0,
        records: Vec::new(),
    };
    // middle point m with endpoints (p, q); asymmetric matrices also get the
    // reversed direction
    let assignments = [(y, x, z), (x, y, z), (x, z, y)];
    for &(p, m, q) in &assignments {
        let directions: &[(usize, usize, usize)] = if symmetric {
            &[(p, m, q)]
        } else {
            &[(p, m, q), (q, m, p)]
        };
        for &(a, b, c) in directions {
            eval.checked += 1;
            let lhs = d(a, c);
            let leg1 = d(a, b);
            let leg2 = d(b, c);
            let rhs = leg1 + leg2;
            if tol.exceeds(lhs, rhs) {
                eval.violated += 1;
                eval.records.push(ViolationRecord {
                    axiom: ViolationAxiom::Triangle,
                    indices: vec![a, b, c],
                    values: vec![lhs, leg1, leg2],
                    margin: lhs - rhs,
                });
            }
        }
    }
    eval
}

/// Checkpoints for the violation curve: powers of ten, then the plan size.
fn curve_checkpoints(total: u64) -> Vec<u64> {
    let mut checkpoints = Vec::new();
    let mut c = 10u64;
    while c < total {
        checkpoints.push(c);
        c = c.saturating_mul(10);
    }
    if total > 0 {
        checkpoints.push(total);
    }
    checkpoints
}

const TRIANGLE_CHUNK: usize = 16_384;

/// Triangle outcome bundle: per-inequality result, per-triple tally, and
/// the cumulative violation curve.
type TriangleRun<S> = (AxiomResult<S>, TriangleTally, Vec<(u64, u64)>);

fn drive_triangle<S: Scalar>(
    view: TriangleView<'_, S>,
    n: usize,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
    symmetric: bool,
    cap: usize,
    sink: &mut dyn ViolationSink<S>,
) -> Result<TriangleRun<S>> {
    if plan.n() != n {
        return Err(AuditError::PlanError(format!(
            "plan was built for n = {}, matrix has n = {}",
            plan.n(),
            n
        )));
    }

    let checkpoints = curve_checkpoints(plan.count());
    let mut next_checkpoint = 0usize;
    let mut curve = Vec::with_capacity(checkpoints.len());

    let mut tally = TriangleTally::default();
    let mut samples: Vec<ViolationRecord<S>> = Vec::new();

    let mut iter = plan.iter().peekable();
    let mut chunk: Vec<[usize; 3]> = Vec::with_capacity(TRIANGLE_CHUNK);
    while iter.peek().is_some() {
        chunk.clear();
        while chunk.len() < TRIANGLE_CHUNK {
            match iter.next() {
                Some(t) => chunk.push(t),
                None => break,
            }
        }
        for &[i, j, k] in &chunk {
            if i >= n || j >= n || k >= n {
                return Err(AuditError::PlanError(format!(
                    "triple ({i},{j},{k}) out of range for n = {n}"
                )));
            }
        }
        // pure per-triple work in parallel; the ordered collect keeps the
        // outcome independent of worker count
        let evals: Vec<TripleEval<S>> = chunk
            .par_iter()
            .map(|&t| eval_triple(view, t, tol, symmetric))
            .collect();
        for eval in evals {
            tally.triples += 1;
            tally.inequalities += eval.checked as u64;
            tally.violating_inequalities += eval.violated as u64;
            if eval.violated > 0 {
                tally.violating_triples += 1;
            }
            for record in eval.records {
                sink.record(&record);
                if samples.len() < cap {
                    samples.push(record);
                }
            }
            if next_checkpoint < checkpoints.len() && tally.triples == checkpoints[next_checkpoint]
            {
                curve.push((tally.triples, tally.violating_inequalities));
                next_checkpoint += 1;
            }
        }
    }

    let result = AxiomResult::from_records(
        tally.inequalities,
        tally.violating_inequalities,
        samples,
        cap,
    );
    Ok((result, tally, curve))
}

/// Property 4: d(x, z) <= d(x, y) + d(y, z) over the planned triples. Counts
/// inequalities, not triples: 3 middle-point assignments per triple on a
/// symmetric matrix, all 6 ordered assignments otherwise.
pub fn check_triangle<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
) -> Result<AxiomResult<S>> {
    require_dissimilarity(matrix)?;
    let symmetric = is_symmetric_within(matrix, tol);
    let (result, _, _) = drive_triangle(
        TriangleView::Direct(matrix),
        matrix.n(),
        plan,
        tol,
        symmetric,
        DEFAULT_SAMPLE_CAP,
        &mut NoopSink,
    )?;
    Ok(result)
}

/// Triangle counts at triple granularity (violating triples as well as
/// violating inequalities), for estimator comparisons.
pub fn triangle_tally<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
) -> Result<TriangleTally> {
    require_dissimilarity(matrix)?;
    let symmetric = is_symmetric_within(matrix, tol);
    let (_, tally, _) = drive_triangle(
        TriangleView::Direct(matrix),
        matrix.n(),
        plan,
        tol,
        symmetric,
        0,
        &mut NoopSink,
    )?;
    Ok(tally)
}

/// Map the four axiom outcomes to a taxonomy label: a metric passes all
/// four; each single-axiom relaxation has its own name; everything else is
/// non-metric with the list of failed axioms.
pub fn classify_function<S: Scalar>(
    results: &BTreeMap<AxiomName, AxiomResult<S>>,
) -> Result<ClassificationLabel> {
    for name in AxiomName::ALL {
        if !results.contains_key(&name) {
            return Err(AuditError::IncompleteAudit(name.as_str()));
        }
    }
    let failed: Vec<AxiomName> = AxiomName::ALL
        .into_iter()
        .filter(|name| results[name].violations > 0)
        .collect();
    Ok(match failed.as_slice() {
        [] => ClassificationLabel::Metric,
        [AxiomName::Triangle] => ClassificationLabel::Semimetric,
        [AxiomName::Symmetry] => ClassificationLabel::Quasimetric,
        [AxiomName::Identity] => ClassificationLabel::Pseudometric,
        _ => ClassificationLabel::Nonmetric(failed),
    })
}

/// Full audit of a scorer over a dataset: build the matrix, apply the
/// smaller-is-better transform to similarity scores, run all four checks,
/// classify, and emit the violation curve and symmetry histogram.
pub fn run_audit<S: Scalar>(
    scorer: &dyn Scorer<S>,
    dataset: &Dataset<S>,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
    seed: Option<u64>,
    opts: &AuditOptions<S>,
) -> Result<AuditReport<S>> {
    run_audit_with_sink(scorer, dataset, plan, tol, seed, opts, &mut NoopSink)
}

/// [`run_audit`] with a sink receiving the full violation stream (reports
/// cap stored records at `opts.sample_cap`).
pub fn run_audit_with_sink<S: Scalar>(
    scorer: &dyn Scorer<S>,
    dataset: &Dataset<S>,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
    seed: Option<u64>,
    opts: &AuditOptions<S>,
    sink: &mut dyn ViolationSink<S>,
) -> Result<AuditReport<S>> {
    let matrix = build_score_matrix(scorer, dataset)?;
    audit_pipeline(&matrix, Some(dataset), plan, tol, seed, opts, sink)
}

/// Audit a precomputed score matrix. Without a dataset the identity check
/// cannot exempt duplicate samples, so every off-diagonal pair counts.
pub fn run_audit_matrix<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    dataset: Option<&Dataset<S>>,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
    seed: Option<u64>,
    opts: &AuditOptions<S>,
) -> Result<AuditReport<S>> {
    audit_pipeline(matrix, dataset, plan, tol, seed, opts, &mut NoopSink)
}

/// [`run_audit_matrix`] with a violation sink.
pub fn run_audit_matrix_with_sink<S: Scalar>(
    matrix: &ScoreMatrix<S>,
    dataset: Option<&Dataset<S>>,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
    seed: Option<u64>,
    opts: &AuditOptions<S>,
    sink: &mut dyn ViolationSink<S>,
) -> Result<AuditReport<S>> {
    audit_pipeline(matrix, dataset, plan, tol, seed, opts, sink)
}

fn audit_pipeline<S: Scalar>(
    raw: &ScoreMatrix<S>,
    dataset: Option<&Dataset<S>>,
    plan: &TripletPlan,
    tol: &Tolerance<S>,
    seed: Option<u64>,
    opts: &AuditOptions<S>,
    sink: &mut dyn ViolationSink<S>,
) -> Result<AuditReport<S>> {
    if let Some(ds) = dataset {
        if ds.len() != raw.n() {
            return Err(AuditError::DimensionError {
                expected: raw.n(),
                got: ds.len(),
            });
        }
    }
    let bin_width_valid = opts.bin_width.is_finite() && opts.bin_width > S::zero();
    if !bin_width_valid {
        return Err(AuditError::ConfigError(format!(
            "bin width must be positive, got {}",
            opts.bin_width
        )));
    }

    // similarity scores pass through T; dissimilarity scores are audited raw
    // unless the caller explicitly forces the transform
    let transformed = match raw.polarity() {
        Polarity::Similarity => Some(transform_smaller_is_better(raw)?),
        Polarity::Dissimilarity if opts.force_transform => {
            Some(transform_smaller_is_better_forced(raw)?)
        }
        Polarity::Dissimilarity => None,
    };
    let audit_matrix = transformed.as_ref().map(|t| t.matrix()).unwrap_or(raw);
    let transform_info = TransformInfo {
        applied: transformed.is_some(),
        s_max: transformed.as_ref().map(|t| t.s_max()),
        scope: opts.transform_scope,
    };

    let cap = opts.sample_cap;
    let non_negativity = check_non_negativity_inner(audit_matrix, tol, cap, sink);
    let identity = check_identity_inner(audit_matrix, dataset, tol, cap, sink);
    let (symmetry, histogram) = check_symmetry_inner(audit_matrix, tol, opts.bin_width, cap, sink);
    let symmetric = symmetry.violations == 0;

    let view = if transformed.is_some() && opts.transform_scope == TransformScope::PerTriplet {
        TriangleView::PerTriplet(raw)
    } else {
        TriangleView::Direct(audit_matrix)
    };
    let (triangle, _tally, curve) = drive_triangle(view, raw.n(), plan, tol, symmetric, cap, sink)?;

    let mut axioms = BTreeMap::new();
    axioms.insert(AxiomName::NonNegativity, non_negativity);
    axioms.insert(AxiomName::Identity, identity);
    axioms.insert(AxiomName::Symmetry, symmetry);
    axioms.insert(AxiomName::Triangle, triangle);
    let classification = classify_function(&axioms)?;

    Ok(AuditReport {
        scorer: raw.scorer_name().to_string(),
        n: raw.n(),
        seed: seed.or(plan.seed()),
        tolerance: *tol,
        plan: plan.description(),
        transform: transform_info,
        axioms,
        classification,
        symmetry_histogram: Some(histogram),
        violation_curve: Some(curve),
    })
}
