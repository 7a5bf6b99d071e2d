//! Configuration-driven runs: `spectrum`, `evolve`, `inversion`, `verify`.

pub mod config;
pub mod run;
pub mod verify;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::oracle::ComparisonReport;
use config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => csv_field(s),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.clone(), serde_json::to_value(c).unwrap_or(Value::Null)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub table: Table,
    pub reports: Vec<ComparisonReport>,
    pub provenance: Value,
}

impl RunOutput {
    /// True when a non-diagnostic check failed.
    pub fn failed(&self) -> bool {
        self.reports.iter().any(ComparisonReport::failed)
    }

    pub fn render(&self, config: &RunConfig, format: Format) -> String {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let doc = json!({
                    "config": config,
                    "rows": self.table.to_json_rows(),
                    "reports": self.reports,
                    "provenance": self.provenance,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json");
                s.push('\n');
                s
            }
        }
    }
}

/// Machine-readable record for a failed run.
pub fn render_error(err: &Error, format: Format) -> String {
    match format {
        Format::Csv => format!("error_kind,message\n{},{}\n", err.kind(), csv_field(&err.to_string())),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "error": { "error_kind": err.kind(), "message": err.to_string() }
            }))
            .expect("json");
            s.push('\n');
            s
        }
    }
}
