//! Per-feature importance scores.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{CellValue, Sample, TabularSchema};

/// Number of equal-frequency bins for numeric features.
pub const NUMERIC_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceSource {
    External(String),
    Builtin(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub scores: Vec<f64>,
    pub source: ImportanceSource,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImportanceError {
    #[error("expected {expected} scores, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("feature `{name}` has invalid score {value}")]
    InvalidScore { name: String, value: f64 },
    #[error("all scores are zero")]
    AllZero,
    #[error("no score given for feature `{0}`")]
    MissingFeature(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("feature `{0}` is scored more than once")]
    DuplicateFeature(String),
    #[error("need at least two distinct labels, found {0}")]
    TooFewClasses(usize),
}

impl ImportanceVector {
    pub fn new(scores: Vec<f64>, source: ImportanceSource) -> Result<Self, ImportanceError> {
        for (i, s) in scores.iter().enumerate() {
            if !s.is_finite() || *s < 0.0 {
                return Err(ImportanceError::InvalidScore {
                    name: alloc::format!("#{i}"),
                    value: *s,
                });
            }
        }
        if !scores.iter().any(|s| *s > 0.0) {
            return Err(ImportanceError::AllZero);
        }
        Ok(ImportanceVector { scores, source })
    }

    /// Orders `(name, score)` pairs by the schema's feature columns.
    pub fn from_named<I>(
        pairs: I,
        schema: &TabularSchema,
        source: ImportanceSource,
    ) -> Result<Self, ImportanceError>
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        let mut scores: Vec<Option<f64>> = alloc::vec![None; schema.n_features()];
        for (name, value) in pairs {
            let index = schema
                .feature_index(&name)
                .ok_or_else(|| ImportanceError::UnknownFeature(name.clone()))?;
            if !value.is_finite() || value < 0.0 {
                return Err(ImportanceError::InvalidScore { name, value });
            }
            if scores[index].replace(value).is_some() {
                return Err(ImportanceError::DuplicateFeature(name));
            }
        }
        let scores = scores
            .into_iter()
            .zip(schema.features())
            .map(|(s, c)| s.ok_or_else(|| ImportanceError::MissingFeature(c.name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(scores, source)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Feature with the highest score (lowest index on ties).
    pub fn argmax(&self) -> usize {
        crate::layout::importance_ranking(&self.scores)[0]
    }
}

/// Discrete symbol of one cell for mutual-information counting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Symbol {
    Bin(usize),
    Category(String),
    Missing,
}

/// Equal-frequency bin of every present value of a numeric column.
///
/// Present values are sorted numerically; a value's bin is
/// `floor(rank * bins / count)` where `rank` is the position of its first
/// occurrence, so equal values always share a bin.
fn numeric_symbols(values: &[&CellValue]) -> Vec<Symbol> {
    let parsed: Vec<Option<f64>> = values
        .iter()
        .map(|v| match v {
            CellValue::Present(s) => s.parse::<f64>().ok(),
            CellValue::Missing(_) => None,
        })
        .collect();
    let mut sorted: Vec<f64> = parsed.iter().flatten().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();
    parsed
        .iter()
        .zip(values)
        .map(|(p, v)| match (p, v) {
            (Some(x), _) => {
                let rank = sorted.partition_point(|s| s.total_cmp(x).is_lt());
                Symbol::Bin(rank * NUMERIC_BINS / count)
            }
            (None, CellValue::Present(s)) => Symbol::Category(s.clone()),
            (None, CellValue::Missing(_)) => Symbol::Missing,
        })
        .collect()
}

fn categorical_symbols(values: &[&CellValue]) -> Vec<Symbol> {
    values
        .iter()
        .map(|v| match v {
            CellValue::Present(s) => Symbol::Category(s.clone()),
            CellValue::Missing(_) => Symbol::Missing,
        })
        .collect()
}

/// Plug-in mutual information (nats) between two discrete sequences.
fn mutual_information<X: Ord, Y: Ord>(xs: &[X], ys: &[Y]) -> f64 {
    let n = xs.len() as f64;
    let mut joint: BTreeMap<(&X, &Y), u64> = BTreeMap::new();
    let mut px: BTreeMap<&X, u64> = BTreeMap::new();
    let mut py: BTreeMap<&Y, u64> = BTreeMap::new();
    for (x, y) in xs.iter().zip(ys) {
        *joint.entry((x, y)).or_default() += 1;
        *px.entry(x).or_default() += 1;
        *py.entry(y).or_default() += 1;
    }
    let mut mi = 0.0;
    for ((x, y), c) in &joint {
        let c = *c as f64;
        let ratio = (c * n) / (px[x] as f64 * py[y] as f64);
        mi += c / n * libm::log(ratio);
    }
    mi.max(0.0)
}

/// Mutual information between each feature and the label.
///
/// Numeric features are discretized into [`NUMERIC_BINS`] equal-frequency
/// bins, categorical features use their text, and missing cells are a
/// category of their own. A dataset where every score is zero yields
/// all-equal scores of 1.
pub fn estimate_importance(
    samples: &[Sample],
    schema: &TabularSchema,
) -> Result<ImportanceVector, ImportanceError> {
    let labels: Vec<&str> = samples.iter().map(|s| s.label.as_str()).collect();
    let classes = {
        let mut l = labels.clone();
        l.sort_unstable();
        l.dedup();
        l.len()
    };
    if classes < 2 {
        return Err(ImportanceError::TooFewClasses(classes));
    }
    let mut scores = Vec::with_capacity(schema.n_features());
    for (index, column) in schema.features().enumerate() {
        let values: Vec<&CellValue> = samples.iter().map(|s| &s.values[index]).collect();
        let symbols = if column.kind.is_numeric() {
            numeric_symbols(&values)
        } else {
            categorical_symbols(&values)
        };
        scores.push(mutual_information(&symbols, &labels));
    }
    if scores.iter().all(|s| *s == 0.0) {
        scores.iter_mut().for_each(|s| *s = 1.0);
    }
    ImportanceVector::new(
        scores,
        ImportanceSource::Builtin("mutual_information".to_string()),
    )
}
