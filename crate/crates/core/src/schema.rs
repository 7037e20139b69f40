//! Column kinds, schemas and typed samples.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tokens treated as missing when the caller does not supply its own set.
pub const DEFAULT_MISSING_TOKENS: [&str; 5] = ["", "?", "NA", "na", "N/A"];

pub fn default_missing_tokens() -> BTreeSet<String> {
    DEFAULT_MISSING_TOKENS
        .iter()
        .map(|t| t.to_string())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Integer,
    Real,
    Categorical,
}

impl ColumnKind {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnKind::Integer | ColumnKind::Real)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabularSchema {
    pub columns: Vec<Column>,
    pub label_column: usize,
    pub missing_tokens: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("no data rows")]
    Empty,
    #[error("row {row}: expected {expected} cells, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("label column {label} out of range for {arity} columns")]
    LabelOutOfRange { label: usize, arity: usize },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("header has {found} names but rows have {expected} cells")]
    HeaderArity { expected: usize, found: usize },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
}

/// One cell after missing-token recognition. `Present` keeps the trimmed
/// source text verbatim; `Missing` keeps the token that was matched.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellValue {
    Present(String),
    Missing(String),
}

impl CellValue {
    pub fn is_missing(&self) -> bool {
        matches!(self, CellValue::Missing(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<CellValue>,
    pub label: String,
}

impl TabularSchema {
    pub fn new(
        columns: Vec<Column>,
        label_column: usize,
        missing_tokens: BTreeSet<String>,
    ) -> Result<Self, SchemaError> {
        let schema = TabularSchema {
            columns,
            label_column,
            missing_tokens,
        };
        schema.check()?;
        Ok(schema)
    }

    /// Re-checks the invariants; used after deserializing an override file.
    pub fn check(&self) -> Result<(), SchemaError> {
        if self.label_column >= self.columns.len() {
            return Err(SchemaError::LabelOutOfRange {
                label: self.label_column,
                arity: self.columns.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(SchemaError::DuplicateColumn(c.name.clone()));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn label(&self) -> &Column {
        &self.columns[self.label_column]
    }

    /// Feature columns in order, skipping the label column.
    pub fn features(&self) -> impl Iterator<Item = &Column> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.label_column)
            .map(|(_, c)| c)
    }

    pub fn feature(&self, index: usize) -> Option<&Column> {
        self.features().nth(index)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features().position(|c| c.name == name)
    }

    pub fn is_missing(&self, trimmed: &str) -> bool {
        self.missing_tokens.contains(trimmed)
    }

    /// Builds a sample from one raw record. `row` is only used in errors.
    pub fn sample_from_record<S: AsRef<str>>(
        &self,
        row: usize,
        record: &[S],
    ) -> Result<Sample, SchemaError> {
        if record.len() != self.arity() {
            return Err(SchemaError::Ragged {
                row,
                expected: self.arity(),
                found: record.len(),
            });
        }
        let mut values = Vec::with_capacity(self.n_features());
        let mut label = String::new();
        for (i, cell) in record.iter().enumerate() {
            let text = cell.as_ref().trim();
            if i == self.label_column {
                label = text.to_string();
            } else if self.is_missing(text) {
                values.push(CellValue::Missing(text.to_string()));
            } else {
                values.push(CellValue::Present(text.to_string()));
            }
        }
        Ok(Sample { values, label })
    }

    pub fn samples_from_records<R, S>(&self, records: &[R]) -> Result<Vec<Sample>, SchemaError>
    where
        R: AsRef<[S]>,
        S: AsRef<str>,
    {
        records
            .iter()
            .enumerate()
            .map(|(row, r)| self.sample_from_record(row, r.as_ref()))
            .collect()
    }
}

/// Names `F1..Fk` for the feature columns and `label` for the label column.
pub fn synthesized_names(arity: usize, label_column: usize) -> Vec<String> {
    let mut next = 1;
    (0..arity)
        .map(|i| {
            if i == label_column {
                "label".to_string()
            } else {
                let name = format!("F{next}");
                next += 1;
                name
            }
        })
        .collect()
}

/// Infers a kind for every column of `rows`.
///
/// Cells are trimmed, and cells equal to a missing token take no part in
/// inference. A column is `Integer` when every remaining cell is a base-10
/// integer, `Real` when every remaining cell is a decimal number and at least
/// one is not an integer, and `Categorical` otherwise.
pub fn infer_schema<R, S>(
    names: Option<Vec<String>>,
    rows: &[R],
    label_column: usize,
    missing_tokens: BTreeSet<String>,
) -> Result<TabularSchema, SchemaError>
where
    R: AsRef<[S]>,
    S: AsRef<str>,
{
    let first = rows.first().ok_or(SchemaError::Empty)?;
    let arity = first.as_ref().len();
    if label_column >= arity {
        return Err(SchemaError::LabelOutOfRange {
            label: label_column,
            arity,
        });
    }
    let names = match names {
        Some(n) if n.len() != arity => {
            return Err(SchemaError::HeaderArity {
                expected: arity,
                found: n.len(),
            })
        }
        Some(n) => n,
        None => synthesized_names(arity, label_column),
    };

    let mut acc = alloc::vec![KindAccumulator::default(); arity];
    for (row, record) in rows.iter().enumerate() {
        let record = record.as_ref();
        if record.len() != arity {
            return Err(SchemaError::Ragged {
                row,
                expected: arity,
                found: record.len(),
            });
        }
        for (a, cell) in acc.iter_mut().zip(record) {
            let text = cell.as_ref().trim();
            if !missing_tokens.contains(text) {
                a.observe(text);
            }
        }
    }

    let columns = names
        .into_iter()
        .zip(acc)
        .map(|(name, a)| Column {
            name,
            kind: a.kind(),
        })
        .collect();
    TabularSchema::new(columns, label_column, missing_tokens)
}

#[derive(Debug, Clone, Copy)]
struct KindAccumulator {
    all_integer: bool,
    all_decimal: bool,
}

impl Default for KindAccumulator {
    fn default() -> Self {
        KindAccumulator {
            all_integer: true,
            all_decimal: true,
        }
    }
}

impl KindAccumulator {
    fn observe(&mut self, text: &str) {
        if self.all_integer && !is_integer(text) {
            self.all_integer = false;
        }
        if self.all_decimal && !is_decimal(text) {
            self.all_decimal = false;
        }
    }

    fn kind(self) -> ColumnKind {
        if self.all_integer {
            ColumnKind::Integer
        } else if self.all_decimal {
            ColumnKind::Real
        } else {
            ColumnKind::Categorical
        }
    }
}

fn strip_sign(s: &str) -> &str {
    s.strip_prefix(['+', '-']).unwrap_or(s)
}

/// `[+-]?[0-9]+`
pub fn is_integer(s: &str) -> bool {
    let digits = strip_sign(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// `[+-]?(digits[.digits?] | .digits)([eE][+-]?digits)?`; rejects `inf`/`nan`.
pub fn is_decimal(s: &str) -> bool {
    let body = strip_sign(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty() {
        return false;
    }
    if !all_digits(int_part) || !all_digits(frac_part) {
        return false;
    }
    match exponent {
        None => true,
        Some(e) => is_integer(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rows(data: &[&[&str]]) -> Vec<Vec<String>> {
        data.iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect())
            .collect()
    }

    #[test]
    fn lexical_classes() {
        for s in ["0", "-12", "+7", "0042"] {
            assert!(is_integer(s), "{s}");
            assert!(is_decimal(s), "{s}");
        }
        for s in ["6.0", ".28", "5.", "-1.5e3", "2E-4"] {
            assert!(!is_integer(s), "{s}");
            assert!(is_decimal(s), "{s}");
        }
        for s in [
            "", "-", ".", "inf", "NaN", "1.2.3", "1e", "e5", "blue", "1,5",
        ] {
            assert!(!is_decimal(s), "{s}");
        }
    }

    #[test]
    fn single_integer_column() {
        let r = rows(&[&["1"], &["2"], &["3"]]);
        let s = infer_schema(None, &r, 0, default_missing_tokens()).unwrap();
        assert_eq!(s.columns[0].kind, ColumnKind::Integer);
    }

    #[test]
    fn iris_like_rows_are_real() {
        let r = rows(&[
            &["5.1", "3.5", "1.4", "0.2", "Iris-setosa"],
            &["6.0", "2.2", "5.0", "1.5", "Iris-virginica"],
            &["7", "3", "5", "2", "Iris-virginica"],
        ]);
        let s = infer_schema(None, &r, 4, default_missing_tokens()).unwrap();
        let kinds: Vec<_> = s.features().map(|c| c.kind).collect();
        assert_eq!(kinds, vec![ColumnKind::Real; 4]);
        assert_eq!(s.label().kind, ColumnKind::Categorical);
        let names: Vec<_> = s.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["F1", "F2", "F3", "F4", "label"]);
    }

    #[test]
    fn missing_tokens_do_not_affect_kind() {
        let r = rows(&[&["39", " State-gov"], &["?", " ?"], &["50", "Private"]]);
        let s = infer_schema(None, &r, 1, default_missing_tokens()).unwrap();
        assert_eq!(s.columns[0].kind, ColumnKind::Integer);
    }

    #[test]
    fn ragged_rows_name_the_row() {
        let r = rows(&[&["1", "a"], &["2", "b"], &["3"]]);
        let err = infer_schema(None, &r, 1, default_missing_tokens()).unwrap_err();
        assert_eq!(
            err,
            SchemaError::Ragged {
                row: 2,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn empty_input_is_an_error() {
        let r: Vec<Vec<String>> = vec![];
        assert_eq!(
            infer_schema(None, &r, 0, default_missing_tokens()),
            Err(SchemaError::Empty)
        );
    }

    #[test]
    fn duplicate_header_rejected() {
        let r = rows(&[&["1", "a"]]);
        let names = vec!["x".to_string(), "x".to_string()];
        assert!(matches!(
            infer_schema(Some(names), &r, 1, default_missing_tokens()),
            Err(SchemaError::DuplicateColumn(_))
        ));
    }

    #[test]
    fn question_mark_becomes_missing() {
        let r = rows(&[&["59", " ?", " Husband", " >50K"]]);
        let s = infer_schema(None, &r, 3, default_missing_tokens()).unwrap();
        let sample = s.sample_from_record(0, &r[0]).unwrap();
        assert_eq!(
            sample.values,
            vec![
                CellValue::Present("59".into()),
                CellValue::Missing("?".into()),
                CellValue::Present("Husband".into()),
            ]
        );
        assert_eq!(sample.label, ">50K");
    }

    #[test]
    fn virginica_sample_keeps_lexical_form() {
        let r = rows(&[&["6.0", "2.2", "5.0", "1.5", "Iris-virginica"]]);
        let s = infer_schema(None, &r, 4, default_missing_tokens()).unwrap();
        let sample = s.sample_from_record(0, &r[0]).unwrap();
        let vals: Vec<_> = sample
            .values
            .iter()
            .map(|v| match v {
                CellValue::Present(t) => t.as_str(),
                CellValue::Missing(_) => "<missing>",
            })
            .collect();
        assert_eq!(vals, ["6.0", "2.2", "5.0", "1.5"]);
        assert_eq!(sample.label, "Iris-virginica");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cell() -> impl Strategy<Value = String> {
            prop_oneof![
                "-?[0-9]{1,4}",
                "-?[0-9]{1,3}\\.[0-9]{1,3}",
                "[a-zA-Z][a-zA-Z-]{0,6}",
                Just("?".to_string()),
                Just(String::new()),
            ]
            .prop_flat_map(|c| (Just(c), "[ \t]{0,2}", "[ \t]{0,2}"))
            .prop_map(|(c, l, r)| alloc::format!("{l}{c}{r}"))
        }

        fn table() -> impl Strategy<Value = Vec<Vec<String>>> {
            (1usize..5)
                .prop_flat_map(|w| prop::collection::vec(prop::collection::vec(cell(), w), 1..20))
        }

        proptest! {
            #[test]
            fn present_cells_equal_trimmed_source(t in table()) {
                let label = t[0].len() - 1;
                let s = infer_schema(None, &t, label, default_missing_tokens()).unwrap();
                for (row, rec) in t.iter().enumerate() {
                    let sample = s.sample_from_record(row, rec).unwrap();
                    let sources = rec.iter().enumerate().filter(|(i, _)| *i != label);
                    for (v, (_, src)) in sample.values.iter().zip(sources) {
                        if let CellValue::Present(text) = v {
                            prop_assert_eq!(text.as_str(), src.trim());
                        }
                    }
                }
            }

            #[test]
            fn kind_is_row_permutation_invariant(t in table(), seed in any::<u64>()) {
                let label = t[0].len() - 1;
                let mut shuffled = t.clone();
                // Fisher-Yates with a tiny LCG; proptest shrinks the seed.
                let mut state = seed;
                for i in (1..shuffled.len()).rev() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let j = (state >> 33) as usize % (i + 1);
                    shuffled.swap(i, j);
                }
                let a = infer_schema(None, &t, label, default_missing_tokens()).unwrap();
                let b = infer_schema(None, &shuffled, label, default_missing_tokens()).unwrap();
                prop_assert_eq!(a, b);
            }

            #[test]
            fn all_missing_row_keeps_kinds(t in table(), tok in prop::sample::select(&DEFAULT_MISSING_TOKENS[..])) {
                let label = t[0].len() - 1;
                let mut extended = t.clone();
                extended.push(alloc::vec![tok.to_string(); t[0].len()]);
                let a = infer_schema(None, &t, label, default_missing_tokens()).unwrap();
                let b = infer_schema(None, &extended, label, default_missing_tokens()).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
