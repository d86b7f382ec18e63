//! Bundled datasets used by the CLI examples and the test suites.

use crate::dataset::Dataset;

/// 20 samples, 5 dimensions, 4 class labels; values drawn once from a seeded
/// generator and committed verbatim.
pub const POINTS20_CSV: &str = include_str!("../data/points20.csv");

/// Four 2-D vectors probing cosine scoring: two parallel vectors of
/// different length (a distinct pair at angle zero) plus vectors at 60 and
/// 120 degrees from the first.
pub const COSINE_VECTORS_CSV: &str = include_str!("../data/cosine_vectors.csv");

/// Unit vectors at 0, 60 and 120 degrees: the minimal triangle-violation
/// witness for cosine dissimilarity.
pub const ANGLES_CSV: &str = include_str!("../data/angles.csv");

/// Collinear 1-D points {0, 1, 2}: squared Euclidean violates the triangle
/// inequality here with margin exactly 2.
pub const LINE012_CSV: &str = include_str!("../data/line012.csv");

/// 1-D points {0, 1, 4, 6}: the gallery on which probe-dependent
/// neighborhood normalization produces asymmetric scores.
pub const LINE0146_CSV: &str = include_str!("../data/line0146.csv");

pub fn points20() -> Dataset<f64> {
    Dataset::from_csv_reader(POINTS20_CSV.as_bytes()).expect("bundled fixture parses")
}

pub fn cosine_vectors() -> Dataset<f64> {
    Dataset::from_csv_reader(COSINE_VECTORS_CSV.as_bytes()).expect("bundled fixture parses")
}

pub fn angle_vectors() -> Dataset<f64> {
    Dataset::from_csv_reader(ANGLES_CSV.as_bytes()).expect("bundled fixture parses")
}

pub fn line012() -> Dataset<f64> {
    Dataset::from_csv_reader(LINE012_CSV.as_bytes()).expect("bundled fixture parses")
}

pub fn line0146() -> Dataset<f64> {
    Dataset::from_csv_reader(LINE0146_CSV.as_bytes()).expect("bundled fixture parses")
}
