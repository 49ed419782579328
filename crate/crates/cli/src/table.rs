//! Result tables and their CSV / JSON encodings.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::config::{header_lines, RunConfig, ARTIFACT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // Both forms print the shortest digits that parse back exactly.
            Cell::Float(v) if *v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e16) => format!("{v:e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "ragged row");
        self.rows.push(row);
    }

    /// Index of the first row containing a non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.rows
            .iter()
            .position(|r| r.iter().any(|c| matches!(c, Cell::Float(v) if !v.is_finite())))
    }

    fn write_csv(&self, out: &mut String) {
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// A command's output: the main table plus an optional per-N appendix.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub main: Table,
    pub appendix: Option<Table>,
}

impl Report {
    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        for line in header_lines(cfg) {
            writeln!(out, "# {line}").unwrap();
        }
        self.main.write_csv(&mut out);
        if let Some(appendix) = &self.appendix {
            out.push_str("# table = \"appendix\"\n");
            appendix.write_csv(&mut out);
        }
        out
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        let mut doc = json!({
            "artifact": ARTIFACT,
            "config": cfg,
            "columns": self.main.columns,
            "rows": self.main.to_json()["rows"],
        });
        if let Some(appendix) = &self.appendix {
            doc["appendix"] = appendix.to_json();
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialises");
        s.push('\n');
        s
    }
}
