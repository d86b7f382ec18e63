//! Scorer selection by name or parameter JSON, with matrices and negative
//! sets loadable from CSV files.
//!
//! Accepted forms: a bare name (`euclidean`, `sq_euclidean`, `cosine`,
//! `neighborhood`) or a JSON object such as
//! `{"scorer":"mahalanobis","W":[[1,0],[0,1]],"sqrt":true}`.

use metric_audit::{
    cosine_scorer, euclidean_scorer, mahalanobis_w_scorer, neighborhood_normalized_scorer,
    one_shot_scorer, squared_euclidean_scorer, Dataset64, FeatureVector, Scorer,
};
use serde::Deserialize;

use crate::AppError;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "scorer", rename_all = "snake_case")]
pub enum ScorerSpec {
    Euclidean,
    SqEuclidean,
    Mahalanobis {
        #[serde(rename = "W", default)]
        w: Option<Vec<Vec<f64>>>,
        #[serde(rename = "W_csv", default)]
        w_csv: Option<String>,
        #[serde(default)]
        sqrt: bool,
        #[serde(default)]
        sigmoid_bias: Option<f64>,
    },
    Cosine {
        #[serde(rename = "A", default)]
        a: Option<Vec<Vec<f64>>>,
        #[serde(rename = "A_csv", default)]
        a_csv: Option<String>,
    },
    OneShot {
        #[serde(default)]
        negatives: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        negatives_csv: Option<String>,
    },
    Neighborhood {
        #[serde(default)]
        base: Option<Box<ScorerSpec>>,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        beta: Option<f64>,
        #[serde(default)]
        gallery_csv: Option<String>,
    },
}

impl ScorerSpec {
    /// Parse a bare scorer name or a JSON object.
    pub fn parse(raw: &str) -> Result<Self, AppError> {
        let trimmed = raw.trim();
        if trimmed.starts_with('{') {
            serde_json::from_str(trimmed)
                .map_err(|e| AppError::usage(format!("invalid scorer spec: {e}")))
        } else {
            match trimmed {
                "euclidean" => Ok(ScorerSpec::Euclidean),
                "sq_euclidean" => Ok(ScorerSpec::SqEuclidean),
                "cosine" => Ok(ScorerSpec::Cosine {
                    a: None,
                    a_csv: None,
                }),
                "neighborhood" => Ok(ScorerSpec::Neighborhood {
                    base: None,
                    alpha: None,
                    beta: None,
                    gallery_csv: None,
                }),
                other => Err(AppError::usage(format!(
                    "unknown scorer {other:?}; expected euclidean, sq_euclidean, cosine, \
                     neighborhood, or a JSON spec"
                ))),
            }
        }
    }

    /// Instantiate the scorer. `dataset` backs the default neighborhood
    /// gallery.
    pub fn build(&self, dataset: Option<&Dataset64>) -> Result<Box<dyn Scorer<f64>>, AppError> {
        match self {
            ScorerSpec::Euclidean => Ok(Box::new(euclidean_scorer::<f64>())),
            ScorerSpec::SqEuclidean => Ok(Box::new(squared_euclidean_scorer::<f64>())),
            ScorerSpec::Mahalanobis {
                w,
                w_csv,
                sqrt,
                sigmoid_bias,
            } => {
                let w = load_matrix(w.clone(), w_csv.as_deref(), "W")?;
                let mut scorer = mahalanobis_w_scorer(w).map_err(AppError::Runtime)?;
                if *sqrt {
                    scorer = scorer.with_sqrt();
                }
                if let Some(bias) = sigmoid_bias {
                    scorer = scorer.with_sigmoid(*bias);
                }
                Ok(Box::new(scorer))
            }
            ScorerSpec::Cosine { a, a_csv } => {
                let map = match (a, a_csv) {
                    (None, None) => None,
                    _ => Some(load_matrix(a.clone(), a_csv.as_deref(), "A")?),
                };
                Ok(Box::new(cosine_scorer(map).map_err(AppError::Runtime)?))
            }
            ScorerSpec::OneShot {
                negatives,
                negatives_csv,
            } => {
                let rows = match (negatives, negatives_csv) {
                    (Some(rows), _) => rows.clone(),
                    (None, Some(path)) => {
                        let ds = Dataset64::from_csv_path(path).map_err(AppError::Runtime)?;
                        ds.samples().iter().map(|s| s.values().to_vec()).collect()
                    }
                    (None, None) => {
                        return Err(AppError::usage(
                            "one_shot needs \"negatives\" or \"negatives_csv\"".into(),
                        ))
                    }
                };
                let vectors: Result<Vec<FeatureVector<f64>>, _> =
                    rows.into_iter().map(FeatureVector::new).collect();
                let vectors = vectors.map_err(AppError::Runtime)?;
                Ok(Box::new(
                    one_shot_scorer(&vectors).map_err(AppError::Runtime)?,
                ))
            }
            ScorerSpec::Neighborhood {
                base,
                alpha,
                beta,
                gallery_csv,
            } => {
                let base_scorer = match base {
                    Some(spec) => spec.build(dataset)?,
                    None => Box::new(euclidean_scorer::<f64>()),
                };
                let gallery_owned;
                let gallery = match gallery_csv {
                    Some(path) => {
                        gallery_owned =
                            Dataset64::from_csv_path(path).map_err(AppError::Runtime)?;
                        &gallery_owned
                    }
                    None => dataset.ok_or_else(|| {
                        AppError::usage(
                            "neighborhood scorer needs a gallery (default: the audited dataset)"
                                .into(),
                        )
                    })?,
                };
                let scorer = neighborhood_normalized_scorer(
                    base_scorer,
                    gallery,
                    alpha.unwrap_or(f64::NEG_INFINITY),
                    beta.unwrap_or(f64::INFINITY),
                )
                .map_err(AppError::Runtime)?;
                Ok(Box::new(scorer))
            }
        }
    }
}

fn load_matrix(
    inline: Option<Vec<Vec<f64>>>,
    csv_path: Option<&str>,
    name: &str,
) -> Result<Vec<Vec<f64>>, AppError> {
    match (inline, csv_path) {
        (Some(rows), _) => Ok(rows),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::usage(format!("cannot read {name} matrix {path}: {e}")))?;
            let mut rows = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let row: Result<Vec<f64>, _> =
                    line.split(',').map(|f| f.trim().parse::<f64>()).collect();
                rows.push(row.map_err(|_| {
                    AppError::usage(format!("{name} matrix {path} line {}: bad number", idx + 1))
                })?);
            }
            Ok(rows)
        }
        (None, None) => Err(AppError::usage(format!(
            "mahalanobis/cosine specs need \"{name}\" or \"{name}_csv\""
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_names_parse() {
        assert!(matches!(
            ScorerSpec::parse("euclidean").unwrap(),
            ScorerSpec::Euclidean
        ));
        assert!(matches!(
            ScorerSpec::parse("cosine").unwrap(),
            ScorerSpec::Cosine { .. }
        ));
        assert!(ScorerSpec::parse("made_up").is_err());
    }

    #[test]
    fn json_spec_with_inline_matrix() {
        let spec =
            ScorerSpec::parse(r#"{"scorer":"mahalanobis","W":[[1,0],[0,1]],"sqrt":true}"#).unwrap();
        let scorer = spec.build(None).unwrap();
        assert_eq!(scorer.name(), "mahalanobis");
        let a = FeatureVector::new(vec![0.0, 0.0]).unwrap();
        let b = FeatureVector::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(scorer.score_pair(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn one_shot_spec_with_inline_negatives() {
        let spec =
            ScorerSpec::parse(r#"{"scorer":"one_shot","negatives":[[0,1],[0,-1]]}"#).unwrap();
        let scorer = spec.build(None).unwrap();
        let a = FeatureVector::new(vec![2.0, 0.0]).unwrap();
        let b = FeatureVector::new(vec![4.0, 0.0]).unwrap();
        assert_eq!(scorer.score_pair(&a, &b).unwrap(), 3.0);
    }
}
