//! Accuracy-table ingestion and the metric-vs-non-metric gap summary.
//!
//! Three result tables ship as bundled CSV fixtures (LFW pair matching,
//! Caltech 101 with 15 and with 30 training samples); each row records a
//! published accuracy and whether the scoring function is fully metric.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Which benchmark a result row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetTag {
    #[serde(rename = "LFW")]
    Lfw,
    Caltech15,
    Caltech30,
}

impl DatasetTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetTag::Lfw => "LFW",
            DatasetTag::Caltech15 => "Caltech15",
            DatasetTag::Caltech30 => "Caltech30",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "LFW" => Some(DatasetTag::Lfw),
            "Caltech15" => Some(DatasetTag::Caltech15),
            "Caltech30" => Some(DatasetTag::Caltech30),
            _ => None,
        }
    }
}

/// Metric status of a published system. Side-information users stay a
/// distinct flag for plotting but group with nonmetric for the headline gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFlag {
    Metric,
    Nonmetric,
    NonmetricSideinfo,
}

impl MetricFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricFlag::Metric => "metric",
            MetricFlag::Nonmetric => "nonmetric",
            MetricFlag::NonmetricSideinfo => "nonmetric_sideinfo",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "metric" => Some(MetricFlag::Metric),
            "nonmetric" => Some(MetricFlag::Nonmetric),
            "nonmetric_sideinfo" => Some(MetricFlag::NonmetricSideinfo),
            _ => None,
        }
    }

    /// Grouping for the headline best/gap numbers.
    pub fn is_metric_group(self) -> bool {
        self == MetricFlag::Metric
    }
}

/// One published result: year, accuracy percent, optional error half-width,
/// metric flag, citation key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dataset: DatasetTag,
    pub year: u16,
    pub accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub err: Option<f64>,
    pub metric_flag: MetricFlag,
    pub citation_key: String,
}

/// Parse a results CSV (`dataset,year,accuracy,err,metric,citation`), with
/// range validation. An empty `err` field means no error bar was published.
pub fn ingest_results<R: Read>(reader: R) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: usize, msg: String| AuditError::ParseError { line, msg };

    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let expected = ["dataset", "year", "accuracy", "err", "metric", "citation"];
    if headers.iter().ne(expected) {
        return Err(parse_err(
            1,
            format!("header must be {}", expected.join(",")),
        ));
    }

    let mut records = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| parse_err(line, e.to_string()))?;
        if row.len() != 6 {
            return Err(parse_err(
                line,
                format!("expected 6 fields, got {}", row.len()),
            ));
        }
        let dataset = DatasetTag::parse(&row[0])
            .ok_or_else(|| parse_err(line, format!("unknown dataset {:?}", &row[0])))?;
        let year: u16 = row[1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad year {:?}", &row[1])))?;
        if !(1990..=2030).contains(&year) {
            return Err(parse_err(line, format!("year {year} out of [1990, 2030]")));
        }
        let accuracy: f64 = row[2]
            .parse()
            .map_err(|_| parse_err(line, format!("bad accuracy {:?}", &row[2])))?;
        if !(0.0..=100.0).contains(&accuracy) {
            return Err(parse_err(
                line,
                format!("accuracy {accuracy} out of [0, 100]"),
            ));
        }
        let err = if row[3].is_empty() {
            None
        } else {
            let e: f64 = row[3]
                .parse()
                .map_err(|_| parse_err(line, format!("bad err {:?}", &row[3])))?;
            if !(0.0..=100.0).contains(&e) {
                return Err(parse_err(line, format!("err {e} out of [0, 100]")));
            }
            Some(e)
        };
        let metric_flag = MetricFlag::parse(&row[4])
            .ok_or_else(|| parse_err(line, format!("unknown metric flag {:?}", &row[4])))?;
        let citation_key = row[5].to_string();
        if citation_key.is_empty() {
            return Err(parse_err(line, "empty citation key".into()));
        }
        records.push(ResultRecord {
            dataset,
            year,
            accuracy,
            err,
            metric_flag,
            citation_key,
        });
    }
    Ok(records)
}

pub fn ingest_results_path(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let file = std::fs::File::open(path)?;
    ingest_results(file)
}

/// Per-year maximum accuracy for one flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearFlagMax {
    pub year: u16,
    pub flag: MetricFlag,
    pub max_accuracy: f64,
}

/// Headline comparison for one dataset: best accuracy in the metric and
/// non-metric groups (side-information counts as non-metric), their gap, and
/// per-year maxima per raw flag for trend plotting. Empty groups are absent,
/// not zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub dataset: DatasetTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_metric: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_nonmetric: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    pub per_year_max_by_flag: Vec<YearFlagMax>,
}

impl Summary {
    /// 3-column CSV (`year,flag,max_accuracy`) for plotting.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("year,flag,max_accuracy\n");
        for row in &self.per_year_max_by_flag {
            out.push_str(&format!(
                "{},{},{}\n",
                row.year,
                row.flag.as_str(),
                row.max_accuracy
            ));
        }
        out
    }
}

/// Summarize the records belonging to one dataset. Record order does not
/// matter.
pub fn summarize(records: &[ResultRecord], dataset: DatasetTag) -> Result<Summary> {
    let rows: Vec<&ResultRecord> = records.iter().filter(|r| r.dataset == dataset).collect();
    if rows.is_empty() {
        return Err(AuditError::ConfigError(format!(
            "no records for dataset {}",
            dataset.as_str()
        )));
    }

    let best = |metric_group: bool| -> Option<f64> {
        rows.iter()
            .filter(|r| r.metric_flag.is_metric_group() == metric_group)
            .map(|r| r.accuracy)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
    };
    let best_metric = best(true);
    let best_nonmetric = best(false);
    let gap = match (best_metric, best_nonmetric) {
        (Some(m), Some(nm)) => Some(nm - m),
        _ => None,
    };

    let mut per_year: BTreeMap<(u16, MetricFlag), f64> = BTreeMap::new();
    for r in &rows {
        per_year
            .entry((r.year, r.metric_flag))
            .and_modify(|m| *m = m.max(r.accuracy))
            .or_insert(r.accuracy);
    }
    let per_year_max_by_flag = per_year
        .into_iter()
        .map(|((year, flag), max_accuracy)| YearFlagMax {
            year,
            flag,
            max_accuracy,
        })
        .collect();

    Ok(Summary {
        dataset,
        best_metric,
        best_nonmetric,
        gap,
        per_year_max_by_flag,
    })
}

/// The transcribed tables bundled with the crate.
pub mod bundled {
    use super::*;

    pub const LFW_CSV: &str = include_str!("../data/lfw.csv");
    pub const CALTECH15_CSV: &str = include_str!("../data/caltech15.csv");
    pub const CALTECH30_CSV: &str = include_str!("../data/caltech30.csv");

    pub fn csv_for(dataset: DatasetTag) -> &'static str {
        match dataset {
            DatasetTag::Lfw => LFW_CSV,
            DatasetTag::Caltech15 => CALTECH15_CSV,
            DatasetTag::Caltech30 => CALTECH30_CSV,
        }
    }

    pub fn records_for(dataset: DatasetTag) -> Vec<ResultRecord> {
        ingest_results(csv_for(dataset).as_bytes()).expect("bundled tables parse")
    }
}
