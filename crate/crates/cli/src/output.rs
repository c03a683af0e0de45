//! CSV and JSON writers and readers, with provenance metadata.
//!
//! CSV files carry a header row and LF line endings, with numbers printed to
//! nine significant digits. Each CSV gets a `<file>.meta.json` sidecar holding
//! the resolved configuration and the SHA-256 of the CSV bytes. JSON documents
//! embed the same metadata under `metadata`; the hash covers the serialized
//! `data` member.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// A table of numbers with a header. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| Some(v)).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// The same table with every value rounded as the CSV writer rounds it.
    pub fn rounded(&self) -> Table {
        Table {
            header: self.header.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v.map(|x| format_number(x).parse().unwrap())).collect())
                .collect(),
        }
    }
}

/// Nine significant digits; scientific notation outside `[1e-4, 1e9)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let rounded: f64 = sci.parse().unwrap();
    let a = rounded.abs();
    if (1e-4..1e9).contains(&a) {
        format!("{rounded}")
    } else {
        let (mantissa, exp) = sci.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

pub fn table_to_csv(table: &Table) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.map(format_number).unwrap_or_default()))
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
}

pub fn table_from_csv(text: &str) -> Result<Table, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(io)?.iter().map(str::to_string).collect::<Vec<_>>();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(io)?;
        let row = record
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|e| CliError::Io(format!("bad number {cell:?}: {e}")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: RunConfig,
    pub content_hash: String,
    /// Derived results that do not fit the table, such as fitted exponents.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub summary: Value,
}

/// A JSON document: `{ "data": ..., "metadata": ... }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub data: T,
    pub metadata: Metadata,
}

impl<T: Serialize> Document<T> {
    pub fn new(data: T, config: &RunConfig, summary: Value) -> Result<Self, CliError> {
        // Hash the sorted-key form so a parsed document re-hashes identically.
        let bytes = serde_json::to_vec(&serde_json::to_value(&data).map_err(io)?).map_err(io)?;
        Ok(Document {
            data,
            metadata: Metadata {
                config: config.clone(),
                content_hash: sha256_hex(&bytes),
                summary,
            },
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(io)?;
        s.push('\n');
        Ok(s)
    }
}

/// Checks that `content_hash` matches the `data` member of a JSON document.
pub fn verify_document(text: &str) -> Result<bool, CliError> {
    let v: Value = serde_json::from_str(text).map_err(io)?;
    let data = serde_json::to_vec(&v["data"]).map_err(io)?;
    Ok(v["metadata"]["content_hash"].as_str() == Some(sha256_hex(&data).as_str()))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes a result as CSV (plus sidecar) or JSON, to `config.out` or stdout.
pub fn emit<T: Serialize>(config: &RunConfig, table: &Table, data: &T, summary: Value) -> Result<(), CliError> {
    match config.format {
        crate::config::Format::Csv => {
            let csv = table_to_csv(table)?;
            match &config.out {
                Some(path) => {
                    write_file(path, &csv)?;
                    let meta = Metadata {
                        config: config.clone(),
                        content_hash: sha256_hex(csv.as_bytes()),
                        summary,
                    };
                    let mut text = serde_json::to_string_pretty(&meta).map_err(io)?;
                    text.push('\n');
                    write_file(&sidecar_path(path), &text)
                }
                None => std::io::stdout().write_all(csv.as_bytes()).map_err(io),
            }
        }
        crate::config::Format::Json => {
            let text = Document::new(data, config, summary)?.to_json()?;
            match &config.out {
                Some(path) => write_file(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
            }
        }
    }
}
