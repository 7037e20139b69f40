//! Delimited-text input and schema files.

use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use supertml_core::schema::{default_missing_tokens, infer_schema, Sample, TabularSchema};

use crate::error::{Error, Result};

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelSelector {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl FromStr for LabelSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelSelector::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelSelector::Index(i),
                Err(_) => LabelSelector::Name(s.to_string()),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReadOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub label: LabelSelector,
    pub missing_tokens: BTreeSet<String>,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            delimiter: b',',
            has_header: true,
            label: LabelSelector::Last,
            missing_tokens: default_missing_tokens(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn arity(&self) -> Option<usize> {
        self.header
            .as_ref()
            .map(Vec::len)
            .or_else(|| self.rows.first().map(Vec::len))
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        csv::ErrorKind::Utf8 { .. } => {
            Error::parse(path, format!("invalid UTF-8 on line {}", line.unwrap_or(0)))
        }
        other => Error::parse(path, format!("{other:?}")),
    }
}

/// Reads every record; rows must all have the header's (or first row's)
/// arity.
pub fn read_table(path: &Path, opts: &ReadOptions) -> Result<RawTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .from_reader(file);
    let header = if opts.has_header {
        let h = reader.headers().map_err(|e| csv_error(path, e))?;
        Some(h.iter().map(|s| s.trim().to_string()).collect::<Vec<_>>())
    } else {
        None
    };
    let mut rows = Vec::new();
    let mut arity = header.as_ref().map(Vec::len);
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let expected = *arity.get_or_insert(record.len());
        if record.len() != expected {
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            return Err(Error::parse(
                path,
                format!(
                    "line {line}: expected {expected} cells, found {}",
                    record.len()
                ),
            ));
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(RawTable { header, rows })
}

pub fn resolve_label(
    header: Option<&[String]>,
    arity: usize,
    selector: &LabelSelector,
) -> Result<usize> {
    match selector {
        LabelSelector::Last if arity > 0 => Ok(arity - 1),
        LabelSelector::Last => Err(Error::Usage("table has no columns".into())),
        LabelSelector::Index(i) if *i < arity => Ok(*i),
        LabelSelector::Index(i) => Err(Error::Usage(format!(
            "label column {i} out of range for {arity} columns"
        ))),
        LabelSelector::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Usage(format!("no column named `{name}`"))),
    }
}

pub fn infer_table_schema(table: &RawTable, opts: &ReadOptions) -> Result<TabularSchema> {
    let arity = table.arity().unwrap_or(0);
    let label = resolve_label(table.header.as_deref(), arity, &opts.label)?;
    Ok(infer_schema(
        table.header.clone(),
        &table.rows,
        label,
        opts.missing_tokens.clone(),
    )?)
}

pub fn infer_file_schema(path: &Path, opts: &ReadOptions) -> Result<TabularSchema> {
    infer_table_schema(&read_table(path, opts)?, opts)
}

/// Parses every data row of `path` against `schema`.
pub fn parse_dataset(
    path: &Path,
    schema: &TabularSchema,
    opts: &ReadOptions,
) -> Result<Vec<Sample>> {
    let table = read_table(path, opts)?;
    if let Some(arity) = table.arity() {
        if arity != schema.arity() {
            return Err(Error::parse(
                path,
                format!("table has {arity} columns, schema has {}", schema.arity()),
            ));
        }
    }
    Ok(schema.samples_from_records(&table.rows)?)
}

pub fn load_schema(path: &Path) -> Result<TabularSchema> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let schema: TabularSchema = serde_json::from_reader(file).map_err(|e| Error::parse(path, e))?;
    schema.check()?;
    Ok(schema)
}

pub fn schema_to_json(schema: &TabularSchema) -> String {
    let mut s = serde_json::to_string_pretty(schema).expect("schema serializes");
    s.push('\n');
    s
}
