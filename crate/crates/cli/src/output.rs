//! Tabular datasets, their CSV/JSON encodings and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(&'static str),
    Empty,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Dataset {
    pub fn new(name: &'static str, columns: Vec<&'static str>) -> Self {
        Dataset {
            name,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(v) => out.push_str(&format_float(*v)),
                    Cell::Int(i) => write!(out, "{i}").expect("writing to a String"),
                    Cell::Text(s) => out.push_str(s),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }

    /// `{"columns": [...], "rows": [[...], ...]}`; non-finite and empty cells are null.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(v) => serde_json::Number::from_f64(*v)
                                .map(Value::Number)
                                .unwrap_or(Value::Null),
                            Cell::Int(i) => json!(i),
                            Cell::Text(s) => json!(s),
                            Cell::Empty => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect();
        let mut s = serde_json::to_string(&json!({ "columns": self.columns, "rows": rows }))
            .expect("dataset serializes");
        s.push('\n');
        s
    }

    pub fn encode(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEntry {
    pub trajectory: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: &'static str,
    pub seed: u64,
    /// The effective configuration as TOML; parses back to an equal config.
    pub config: String,
    pub files: Vec<FileEntry>,
    pub partial: bool,
    pub failures: Vec<FailureEntry>,
    pub created_unix: u64,
}

/// Writes `data` into `dir` and returns its manifest entry.
pub fn write_dataset(dir: &Path, data: &Dataset, format: Format) -> Result<FileEntry, CliError> {
    let name = format!("{}.{}", data.name, format.extension());
    let body = data.encode(format);
    std::fs::write(dir.join(&name), &body).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    Ok(FileEntry {
        name,
        rows: data.rows.len(),
        sha256: hex::encode(Sha256::digest(body.as_bytes())),
    })
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let mut body = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    body.push('\n');
    std::fs::write(dir.join("manifest.json"), body)
        .map_err(|e| CliError::Io(format!("manifest.json: {e}")))
}
