//! The text drawn for each cell.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{CellValue, Column, ColumnKind, Sample, TabularSchema};

pub const DEFAULT_MISSING_TEXT: &str = "missing";
pub const DEFAULT_MAX_NUMERIC_CHARS: usize = 16;
pub const DEFAULT_MAX_CATEGORICAL_CHARS: usize = 24;

/// Per-column abbreviation tables, keyed by column name then source value.
pub type AbbreviationMap = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatOptions {
    pub missing_text: String,
    /// Draw the source token (e.g. `?`) instead of `missing_text`.
    #[serde(default)]
    pub preserve_missing_token: bool,
    pub max_numeric_chars: usize,
    pub max_categorical_chars: usize,
    #[serde(default)]
    pub abbreviations: AbbreviationMap,
}

impl Default for FormatOptions {
    fn default() -> Self {
        FormatOptions {
            missing_text: DEFAULT_MISSING_TEXT.to_string(),
            preserve_missing_token: false,
            max_numeric_chars: DEFAULT_MAX_NUMERIC_CHARS,
            max_categorical_chars: DEFAULT_MAX_CATEGORICAL_CHARS,
            abbreviations: AbbreviationMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("missing text must not be empty")]
    EmptyMissingText,
    #[error("character caps must be at least 1")]
    ZeroCap,
    #[error("abbreviation table names unknown feature column `{0}`")]
    UnknownColumn(String),
    #[error("column `{column}`: abbreviation `{abbreviation}` is used for more than one value")]
    DuplicateAbbreviation {
        column: String,
        abbreviation: String,
    },
    #[error("column `{column}`: values `{first}` and `{second}` both format to `{text}`")]
    Indistinct {
        column: String,
        first: String,
        second: String,
        text: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formatted {
    pub text: String,
    pub truncated: bool,
}

impl FormatOptions {
    pub fn max_chars(&self, kind: ColumnKind) -> usize {
        if kind.is_numeric() {
            self.max_numeric_chars
        } else {
            self.max_categorical_chars
        }
    }

    /// Static checks: non-empty missing text, caps, known columns and
    /// one-to-one abbreviation tables.
    pub fn validate(&self, schema: &TabularSchema) -> Result<(), FormatError> {
        if self.missing_text.is_empty() {
            return Err(FormatError::EmptyMissingText);
        }
        if self.max_numeric_chars == 0 || self.max_categorical_chars == 0 {
            return Err(FormatError::ZeroCap);
        }
        for (column, table) in &self.abbreviations {
            if schema.feature_index(column).is_none() {
                return Err(FormatError::UnknownColumn(column.clone()));
            }
            let mut seen = BTreeSet::new();
            for short in table.values() {
                if !seen.insert(short.as_str()) {
                    return Err(FormatError::DuplicateAbbreviation {
                        column: column.clone(),
                        abbreviation: short.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks that, in every column with an abbreviation table, distinct
    /// present values in `samples` still format to distinct strings.
    pub fn check_distinct(
        &self,
        schema: &TabularSchema,
        samples: &[Sample],
    ) -> Result<(), FormatError> {
        for column_name in self.abbreviations.keys() {
            let Some(index) = schema.feature_index(column_name) else {
                return Err(FormatError::UnknownColumn(column_name.clone()));
            };
            let column = schema.feature(index).expect("index from feature_index");
            let mut by_text: BTreeMap<String, &str> = BTreeMap::new();
            for sample in samples {
                let CellValue::Present(raw) = &sample.values[index] else {
                    continue;
                };
                let text = format_value(&sample.values[index], column, self).text;
                match by_text.get(&text) {
                    Some(prev) if *prev != raw.as_str() => {
                        return Err(FormatError::Indistinct {
                            column: column_name.clone(),
                            first: prev.to_string(),
                            second: raw.clone(),
                            text,
                        });
                    }
                    Some(_) => {}
                    None => {
                        by_text.insert(text, raw.as_str());
                    }
                }
            }
        }
        Ok(())
    }
}

/// Returns the string drawn for `value` in `column`.
///
/// Missing cells become `missing_text` (or the source token when
/// `preserve_missing_token` is set and the token is non-empty). Present
/// cells are looked up in the column's abbreviation table and otherwise kept
/// verbatim. The result is cut to the column kind's character cap, and the
/// cut is reported through [`Formatted::truncated`].
pub fn format_value(value: &CellValue, column: &Column, opts: &FormatOptions) -> Formatted {
    let full: &str = match value {
        CellValue::Missing(token) if opts.preserve_missing_token && !token.is_empty() => token,
        CellValue::Missing(_) => &opts.missing_text,
        CellValue::Present(raw) => opts
            .abbreviations
            .get(&column.name)
            .and_then(|t| t.get(raw))
            .map(String::as_str)
            .unwrap_or(raw),
    };
    let cap = opts.max_chars(column.kind);
    match full.char_indices().nth(cap) {
        Some((cut, _)) => Formatted {
            text: full[..cut].to_string(),
            truncated: true,
        },
        None => Formatted {
            text: full.to_string(),
            truncated: false,
        },
    }
}

/// Per-feature character budgets measured over a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetReport {
    /// Longest formatted string per feature, at least 1.
    pub budgets: Vec<usize>,
    /// Cells whose text was cut to the cap.
    pub truncated_cells: usize,
}

pub fn measure_budgets(
    samples: &[Sample],
    schema: &TabularSchema,
    opts: &FormatOptions,
) -> BudgetReport {
    let columns: Vec<&Column> = schema.features().collect();
    let mut budgets = alloc::vec![1usize; columns.len()];
    let mut truncated_cells = 0;
    for sample in samples {
        for ((value, column), budget) in sample.values.iter().zip(&columns).zip(&mut budgets) {
            let f = format_value(value, column, opts);
            truncated_cells += usize::from(f.truncated);
            *budget = (*budget).max(f.text.chars().count());
        }
    }
    BudgetReport {
        budgets,
        truncated_cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::default_missing_tokens;
    use alloc::vec;

    fn cat(name: &str) -> Column {
        Column {
            name: name.into(),
            kind: ColumnKind::Categorical,
        }
    }

    fn present(s: &str) -> CellValue {
        CellValue::Present(s.into())
    }

    #[test]
    fn present_value_is_verbatim() {
        let f = format_value(&present("blue"), &cat("sky"), &FormatOptions::default());
        assert_eq!(f.text, "blue");
        assert!(!f.truncated);
    }

    #[test]
    fn missing_uses_missing_text() {
        let f = format_value(
            &CellValue::Missing("?".into()),
            &cat("humidity"),
            &FormatOptions::default(),
        );
        assert_eq!(f.text, "missing");
    }

    #[test]
    fn missing_can_keep_source_token() {
        let opts = FormatOptions {
            preserve_missing_token: true,
            ..Default::default()
        };
        let col = cat("occupation");
        assert_eq!(
            format_value(&CellValue::Missing("?".into()), &col, &opts).text,
            "?"
        );
        // An empty token has nothing to draw; fall back to the missing text.
        assert_eq!(
            format_value(&CellValue::Missing("".into()), &col, &opts).text,
            "missing"
        );
    }

    #[test]
    fn abbreviation_applies() {
        let mut opts = FormatOptions::default();
        opts.abbreviations
            .insert("sky".into(), [("blue".to_string(), "b".to_string())].into());
        assert_eq!(format_value(&present("blue"), &cat("sky"), &opts).text, "b");
        assert_eq!(
            format_value(&present("grey"), &cat("sky"), &opts).text,
            "grey"
        );
        // Other columns are not affected.
        assert_eq!(
            format_value(&present("blue"), &cat("car"), &opts).text,
            "blue"
        );
    }

    #[test]
    fn truncation_is_reported() {
        let opts = FormatOptions {
            max_numeric_chars: 4,
            ..Default::default()
        };
        let col = Column {
            name: "x".into(),
            kind: ColumnKind::Real,
        };
        let f = format_value(&present("3.14159"), &col, &opts);
        assert_eq!(f.text, "3.14");
        assert!(f.truncated);
        let f = format_value(&present("3.14"), &col, &opts);
        assert!(!f.truncated);
    }

    #[test]
    fn truncation_counts_chars_not_bytes() {
        let opts = FormatOptions {
            max_categorical_chars: 2,
            ..Default::default()
        };
        let f = format_value(&present("éèê"), &cat("x"), &opts);
        assert_eq!(f.text, "éè");
    }

    fn weather_schema() -> TabularSchema {
        TabularSchema::new(vec![cat("sky"), cat("label")], 1, default_missing_tokens()).unwrap()
    }

    #[test]
    fn validation_rejects_bad_tables() {
        let schema = weather_schema();
        let mut opts = FormatOptions {
            missing_text: String::new(),
            ..Default::default()
        };
        assert_eq!(opts.validate(&schema), Err(FormatError::EmptyMissingText));
        opts.missing_text = "missing".into();
        opts.abbreviations.insert(
            "sky".into(),
            [
                ("blue".to_string(), "b".to_string()),
                ("black".to_string(), "b".to_string()),
            ]
            .into(),
        );
        assert!(matches!(
            opts.validate(&schema),
            Err(FormatError::DuplicateAbbreviation { .. })
        ));
        opts.abbreviations.clear();
        opts.abbreviations.insert("wind".into(), BTreeMap::new());
        assert_eq!(
            opts.validate(&schema),
            Err(FormatError::UnknownColumn("wind".into()))
        );
    }

    #[test]
    fn abbreviation_clashing_with_raw_value_is_indistinct() {
        let schema = weather_schema();
        let mut opts = FormatOptions::default();
        opts.abbreviations.insert(
            "sky".into(),
            [("blue".to_string(), "grey".to_string())].into(),
        );
        let samples = vec![
            Sample {
                values: vec![present("blue")],
                label: "Sunny".into(),
            },
            Sample {
                values: vec![present("grey")],
                label: "Rainy".into(),
            },
        ];
        assert!(matches!(
            opts.check_distinct(&schema, &samples),
            Err(FormatError::Indistinct { .. })
        ));
        opts.abbreviations
            .insert("sky".into(), [("blue".to_string(), "b".to_string())].into());
        assert_eq!(opts.check_distinct(&schema, &samples), Ok(()));
    }

    #[test]
    fn budgets_take_longest_formatted_text() {
        let schema = weather_schema();
        let samples = vec![
            Sample {
                values: vec![present("blue")],
                label: "Sunny".into(),
            },
            Sample {
                values: vec![CellValue::Missing("?".into())],
                label: "Rainy".into(),
            },
        ];
        let r = measure_budgets(&samples, &schema, &FormatOptions::default());
        assert_eq!(r.budgets, vec![7]);
        assert_eq!(r.truncated_cells, 0);
        assert_eq!(
            measure_budgets(&[], &schema, &FormatOptions::default()).budgets,
            vec![1]
        );
    }
}
