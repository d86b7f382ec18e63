//! Dense n-by-n score matrices and the "smaller is better" transform.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{AuditError, Result};
use crate::recognition::Scorer;
use crate::scalar::Scalar;

/// Score direction convention: does a larger score mean more similar
/// (similarity) or less similar (dissimilarity)?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Similarity,
    Dissimilarity,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Similarity => "similarity",
            Polarity::Dissimilarity => "dissimilarity",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "similarity" => Ok(Polarity::Similarity),
            "dissimilarity" => Ok(Polarity::Dissimilarity),
            other => Err(AuditError::ParseError {
                line: 1,
                msg: format!("unknown polarity {other:?}"),
            }),
        }
    }
}

impl std::fmt::Display for Polarity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense n-by-n matrix of raw scores from one scorer over one dataset.
/// Entry (i, j) is the score of sample i as probe against sample j as
/// reference; no symmetry is assumed and the diagonal is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix<S: Scalar> {
    n: usize,
    scores: Vec<S>, // row-major
    polarity: Polarity,
    scorer_name: String,
}

impl<S: Scalar> ScoreMatrix<S> {
    /// Build from explicit rows, validating shape and finiteness.
    pub fn from_rows(rows: Vec<Vec<S>>, polarity: Polarity, scorer_name: &str) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(AuditError::InvalidDataset(
                "matrix must be non-empty".into(),
            ));
        }
        let mut scores = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(AuditError::DimensionError {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, v) in row.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(AuditError::NonFiniteScore(i, j));
                }
                scores.push(v);
            }
        }
        Ok(Self {
            n,
            scores,
            polarity,
            scorer_name: scorer_name.to_string(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn scorer_name(&self) -> &str {
        &self.scorer_name
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> S {
        assert!(i < self.n && j < self.n, "matrix index out of range");
        self.scores[i * self.n + j]
    }

    /// d(i, j) - d(j, i). Exactly antisymmetric: delta(i, j) == -delta(j, i).
    pub fn symmetry_delta(&self, i: usize, j: usize) -> S {
        self.entry(i, j) - self.entry(j, i)
    }

    pub fn entries(&self) -> &[S] {
        &self.scores
    }

    pub fn global_max(&self) -> S {
        self.scores
            .iter()
            .copied()
            .fold(S::neg_infinity(), |a, b| if b > a { b } else { a })
    }

    pub fn global_min(&self) -> S {
        self.scores
            .iter()
            .copied()
            .fold(S::infinity(), |a, b| if b < a { b } else { a })
    }

    /// Write as CSV: a `# polarity=...` comment line, then n rows of n
    /// comma-separated values at full round-trip precision.
    pub fn to_csv_writer<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "# polarity={}", self.polarity)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.entry(i, j).to_string()).collect();
            writeln!(writer, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_csv_writer(&mut buf)?;
        String::from_utf8(buf)
            .map_err(|e| AuditError::InvalidDataset(format!("non-UTF8 output: {e}")))
    }

    /// Read a matrix written by [`ScoreMatrix::to_csv_writer`]. The polarity
    /// line is accepted with or without the leading `# `.
    pub fn from_csv_reader<R: Read>(reader: R, scorer_name: &str) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| AuditError::ParseError {
                line: 1,
                msg: "empty matrix file".into(),
            })?
            .map_err(AuditError::Io)?;
        let header = header.trim().trim_start_matches('#').trim();
        let polarity = match header.strip_prefix("polarity=") {
            Some(p) => Polarity::parse(p.trim())?,
            None => {
                return Err(AuditError::ParseError {
                    line: 1,
                    msg: format!("expected polarity=<similarity|dissimilarity>, got {header:?}"),
                })
            }
        };
        let mut rows: Vec<Vec<S>> = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line.map_err(AuditError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<S>> = line
                .split(',')
                .map(|field| {
                    field.trim().parse().map_err(|_| AuditError::ParseError {
                        line: idx + 2,
                        msg: format!("not a number: {field:?}"),
                    })
                })
                .collect();
            rows.push(row?);
        }
        Self::from_rows(rows, polarity, scorer_name)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, scorer_name: &str) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, scorer_name)
    }
}

/// Entry (i, j) = scorer(sample_i as probe, sample_j as reference), including
/// the diagonal. Rows are evaluated in parallel; the result is bit-identical
/// for any worker count because every entry is a pure function of its pair.
pub fn build_score_matrix<S: Scalar>(
    scorer: &dyn Scorer<S>,
    dataset: &Dataset<S>,
) -> Result<ScoreMatrix<S>> {
    let features = dataset.feature_vectors();
    let n = features.len();
    let row_results: Vec<Result<Vec<S>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let s = scorer.score_pair(&features[i], &features[j])?;
                if !s.is_finite() {
                    return Err(AuditError::NonFiniteScore(i, j));
                }
                row.push(s);
            }
            Ok(row)
        })
        .collect();

    // Surface the first error in (i, j) order so failures do not depend on
    // worker scheduling.
    let mut rows = Vec::with_capacity(n);
    for result in row_results {
        rows.push(result?);
    }
    ScoreMatrix::from_rows(rows, scorer.polarity(), scorer.name())
}

/// A similarity matrix pushed through T(s) = s_max - s: every entry becomes
/// a dissimilarity, the minimum is exactly 0 (attained at the argmax of the
/// base), and the entry order is exactly reversed.
#[derive(Debug, Clone)]
pub struct TransformedMatrix<S: Scalar> {
    base: ScoreMatrix<S>,
    s_max: S,
    transformed: ScoreMatrix<S>,
}

impl<S: Scalar> TransformedMatrix<S> {
    pub fn base(&self) -> &ScoreMatrix<S> {
        &self.base
    }

    /// The largest raw score, used as the transform anchor.
    pub fn s_max(&self) -> S {
        self.s_max
    }

    /// The transformed scores as a dissimilarity matrix.
    pub fn matrix(&self) -> &ScoreMatrix<S> {
        &self.transformed
    }
}

fn apply_transform<S: Scalar>(matrix: &ScoreMatrix<S>) -> Result<TransformedMatrix<S>> {
    let s_max = matrix.global_max();
    let n = matrix.n();
    let rows: Vec<Vec<S>> = (0..n)
        .map(|i| (0..n).map(|j| s_max - matrix.entry(i, j)).collect())
        .collect();
    // s_max - s can overflow to infinity for matrices spanning the float
    // range; from_rows reports the offending entry
    let transformed = ScoreMatrix::from_rows(rows, Polarity::Dissimilarity, matrix.scorer_name())?;
    Ok(TransformedMatrix {
        base: matrix.clone(),
        s_max,
        transformed,
    })
}

/// Apply T to a similarity matrix. Refuses dissimilarity input: T would
/// silently invert its meaning. Use
/// [`transform_smaller_is_better_forced`] to override.
pub fn transform_smaller_is_better<S: Scalar>(
    matrix: &ScoreMatrix<S>,
) -> Result<TransformedMatrix<S>> {
    if matrix.polarity() != Polarity::Similarity {
        return Err(AuditError::PolarityError {
            expected: "similarity",
            got: matrix.polarity().as_str(),
        });
    }
    apply_transform(matrix)
}

/// Apply T regardless of polarity (explicit override).
pub fn transform_smaller_is_better_forced<S: Scalar>(
    matrix: &ScoreMatrix<S>,
) -> Result<TransformedMatrix<S>> {
    apply_transform(matrix)
}
