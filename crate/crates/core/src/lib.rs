//! Empirical auditing of similarity and dissimilarity functions for the
//! four metric axioms.
//!
//! The crate builds dense score matrices from pluggable scorers, converts
//! similarity scores to dissimilarities with the smaller-is-better
//! transform T(s) = s_max - s, checks non-negativity, identity, symmetry
//! and the triangle inequality under configurable tolerances, and
//! classifies the function into the metric / pseudometric / quasimetric /
//! semimetric taxonomy. A recognition layer (feature extraction, class
//! models, matching, labeling) hosts the reference scorers whose axiom
//! behavior the audits document, and a meta module tabulates published
//! accuracy records by metric status.
//!
//! Everything numeric is generic over the [`Scalar`] floating-point type;
//! the CLI and bundled fixtures use `f64` (see the crate-root aliases).

pub mod axioms;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod matrix;
pub mod meta;
pub mod recognition;
pub mod sampling;
pub mod scalar;

pub use axioms::{
    check_identity, check_identity_unexempted, check_non_negativity, check_symmetry,
    check_triangle, classify_function, run_audit, run_audit_matrix, run_audit_matrix_with_sink,
    run_audit_with_sink, triangle_tally, wilson_interval, AuditOptions, AuditReport, AxiomName,
    AxiomResult, ClassificationLabel, Histogram, Tolerance, TransformInfo, TransformScope,
    TriangleTally, ViolationAxiom, ViolationRecord, ViolationSink,
};
pub use dataset::{AssumptionBag, AssumptionValue, Dataset, FeatureVector, RawSample};
pub use error::{AuditError, Result};
pub use matrix::{
    build_score_matrix, transform_smaller_is_better, transform_smaller_is_better_forced, Polarity,
    ScoreMatrix, TransformedMatrix,
};
pub use recognition::{
    cosine_scorer, euclidean_scorer, mahalanobis_w_scorer, neighborhood_normalized_scorer,
    one_shot_scorer, run_identification, run_pair_matching, run_search, run_verification,
    squared_euclidean_scorer, ClassModel, FeatureExtractor, IdentityExtractor, Labeler, PairInput,
    Recognizer, Scorer,
};
pub use sampling::{
    enumerate_pairs, enumerate_triplets, sample_triplets, sample_triplets_iid, stratified_triplets,
    MatchPattern, PlanDescription, PlanMode, TripletPlan,
};
pub use scalar::Scalar;

/// Scalar type used by the CLI, the bundled fixtures, and the report files.
pub type Score = f64;

/// Concrete `f64` aliases for the main generic types.
pub type ScoreMatrix64 = matrix::ScoreMatrix<Score>;
pub type Dataset64 = dataset::Dataset<Score>;
pub type AuditReport64 = axioms::AuditReport<Score>;
pub type Tolerance64 = axioms::Tolerance<Score>;
pub type AuditOptions64 = axioms::AuditOptions<Score>;
