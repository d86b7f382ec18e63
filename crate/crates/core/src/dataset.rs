//! Samples, feature vectors, datasets, and their CSV representation.
//!
//! Dataset CSV format: header `id,label,f0,...,f{d-1}`, one row per sample,
//! UTF-8, `.` as the decimal separator.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::scalar::Scalar;

/// One raw input sample: an integer id, an integer class label (0 is
/// reserved for "unknown / non-match"), and a vector of feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample<S: Scalar> {
    id: u64,
    label: u32,
    values: Vec<S>,
}

impl<S: Scalar> RawSample<S> {
    pub fn new(id: u64, label: u32, values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(AuditError::InvalidDataset(format!(
                "sample {id} has no values"
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(AuditError::InvalidDataset(format!(
                "sample {id} contains non-finite value {bad}"
            )));
        }
        Ok(Self { id, label, values })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> u32 {
        self.label
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

/// A D-dimensional feature vector (the output of feature extraction).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> FeatureVector<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.is_empty() {
            return Err(AuditError::InvalidDataset(
                "feature vector must be non-empty".into(),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(AuditError::InvalidDataset(format!(
                "feature vector contains non-finite value {bad}"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Bit-level equality of all entries (distinguishes `-0.0` from `0.0`).
    pub fn bits_equal(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.bit_eq(*b))
    }
}

/// An ordered collection of samples sharing one dimension.
#[derive(Debug, Clone)]
pub struct Dataset<S: Scalar> {
    samples: Vec<RawSample<S>>,
    dimension: usize,
}

impl<S: Scalar> Dataset<S> {
    pub fn new(samples: Vec<RawSample<S>>) -> Result<Self> {
        let first = samples.first().ok_or_else(|| {
            AuditError::InvalidDataset("dataset must contain at least one sample".into())
        })?;
        let dimension = first.dimension();
        let mut seen = HashSet::with_capacity(samples.len());
        for s in &samples {
            if s.dimension() != dimension {
                return Err(AuditError::InvalidDataset(format!(
                    "sample {} has dimension {}, expected {}",
                    s.id(),
                    s.dimension(),
                    dimension
                )));
            }
            if !seen.insert(s.id()) {
                return Err(AuditError::InvalidDataset(format!(
                    "duplicate sample id {}",
                    s.id()
                )));
            }
        }
        Ok(Self { samples, dimension })
    }

    pub fn samples(&self) -> &[RawSample<S>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees >= 1 sample
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn labels(&self) -> Vec<u32> {
        self.samples.iter().map(|s| s.label()).collect()
    }

    /// Feature vectors of all samples, in dataset order (identity extraction).
    pub fn feature_vectors(&self) -> Vec<FeatureVector<S>> {
        self.samples
            .iter()
            .map(|s| FeatureVector::new(s.values().to_vec()).expect("sample invariants"))
            .collect()
    }

    /// Read a dataset from CSV (`id,label,f0,...`).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = rdr
            .headers()
            .map_err(|e| AuditError::ParseError {
                line: 1,
                msg: e.to_string(),
            })?
            .clone();
        validate_dataset_header(&headers)?;
        let dim = headers.len() - 2;

        let mut samples = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let line = idx + 2; // 1-based, after the header
            let record = record.map_err(|e| AuditError::ParseError {
                line,
                msg: e.to_string(),
            })?;
            if record.len() != dim + 2 {
                return Err(AuditError::ParseError {
                    line,
                    msg: format!("expected {} fields, got {}", dim + 2, record.len()),
                });
            }
            let id: u64 = parse_field(&record[0], line, "id")?;
            let label: u32 = parse_field(&record[1], line, "label")?;
            let mut values = Vec::with_capacity(dim);
            for j in 0..dim {
                let v: S = record[j + 2].parse().map_err(|_| AuditError::ParseError {
                    line,
                    msg: format!("field f{j}: not a number: {:?}", &record[j + 2]),
                })?;
                values.push(v);
            }
            samples.push(RawSample::new(id, label, values).map_err(|e| {
                AuditError::ParseError {
                    line,
                    msg: e.to_string(),
                }
            })?);
        }
        Self::new(samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend((0..self.dimension).map(|j| format!("f{j}")));
        wtr.write_record(&header).map_err(csv_io)?;
        for s in &self.samples {
            let mut row = vec![s.id().to_string(), s.label().to_string()];
            row.extend(s.values().iter().map(|v| v.to_string()));
            wtr.write_record(&row).map_err(csv_io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_csv_writer(&mut buf)?;
        String::from_utf8(buf)
            .map_err(|e| AuditError::InvalidDataset(format!("non-UTF8 output: {e}")))
    }
}

fn validate_dataset_header(headers: &csv::StringRecord) -> Result<()> {
    let bad = |msg: String| AuditError::ParseError { line: 1, msg };
    if headers.len() < 3 {
        return Err(bad("header must be id,label,f0,...".into()));
    }
    if &headers[0] != "id" || &headers[1] != "label" {
        return Err(bad(format!(
            "header must start with id,label (got {:?},{:?})",
            &headers[0], &headers[1]
        )));
    }
    for (j, name) in headers.iter().skip(2).enumerate() {
        if name != format!("f{j}") {
            return Err(bad(format!(
                "feature column {j} must be named f{j}, got {name:?}"
            )));
        }
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(raw: &str, line: usize, field: &str) -> Result<T> {
    raw.parse().map_err(|_| AuditError::ParseError {
        line,
        msg: format!("field {field}: cannot parse {raw:?}"),
    })
}

fn csv_io(e: csv::Error) -> AuditError {
    AuditError::ParseError {
        line: 0,
        msg: e.to_string(),
    }
}

/// String-or-number value inside an [`AssumptionBag`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssumptionValue {
    Num(f64),
    Str(String),
}

impl From<f64> for AssumptionValue {
    fn from(v: f64) -> Self {
        AssumptionValue::Num(v)
    }
}

impl From<&str> for AssumptionValue {
    fn from(v: &str) -> Self {
        AssumptionValue::Str(v.to_string())
    }
}

impl From<String> for AssumptionValue {
    fn from(v: String) -> Self {
        AssumptionValue::Str(v)
    }
}

/// Named parameter set attached to a pipeline stage (feature extraction,
/// modeling, matching, labeling). Serialized verbatim into reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssumptionBag {
    entries: BTreeMap<String, AssumptionValue>,
}

impl AssumptionBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<AssumptionValue>) -> Self {
        self.entries.insert(key.to_string(), value.into());
        self
    }

    pub fn set(&mut self, key: &str, value: impl Into<AssumptionValue>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&AssumptionValue> {
        self.entries.get(key)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &AssumptionValue)> {
        self.entries.iter()
    }
}
