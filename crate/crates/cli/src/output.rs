//! Rendering of reports as JSON, CSV or text.

use std::fmt::Write as _;

use nijenhuis::VerificationReport;
use serde::Serialize;
use serde_json::Value;

use crate::error::ErrorReason;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.9e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Column names `x1 … x(m), y` for an `n`-dimensional point, or `x1 … xm`
/// when `with_y` is false.
pub fn coordinate_names(dim: usize, with_y: bool) -> Vec<String> {
    let xs = if with_y { dim - 1 } else { dim };
    let mut names: Vec<String> = (1..=xs).map(|i| format!("x{i}")).collect();
    if with_y {
        names.push("y".into());
    }
    names
}

/// Everything a subcommand produces.
pub struct Outcome {
    pub report: VerificationReport,
    pub data: Option<Value>,
    pub table: Option<Table>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema: u32,
    #[serde(flatten)]
    report: &'a VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<&'a Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a ErrorReason>,
}

pub fn json(report: &VerificationReport, data: Option<&Value>, error: Option<&ErrorReason>) -> String {
    let doc = JsonReport {
        schema: SCHEMA_VERSION,
        report,
        data,
        error,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

pub fn csv(outcome: &Outcome) -> String {
    let table = match &outcome.table {
        Some(t) => t.clone(),
        None => checks_table(&outcome.report),
    };
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn checks_table(report: &VerificationReport) -> Table {
    let mut t = Table::new(vec!["check".into(), "max".into(), "pass".into()]);
    for c in &report.checks {
        t.push(vec![
            Cell::Text(c.name.clone()),
            Cell::Num(c.max),
            Cell::Text(c.pass.to_string()),
        ]);
    }
    t
}

pub fn text(outcome: &Outcome) -> String {
    let r = &outcome.report;
    let mut out = String::new();
    let _ = writeln!(out, "{}", r.subject);
    let _ = writeln!(out, "  result:       {}", if r.pass { "PASS" } else { "FAIL" });
    let _ = writeln!(out, "  accepted:     {}", r.accepted);
    let _ = writeln!(out, "  rejected:     {}", r.rejected);
    let _ = writeln!(out, "  max residual: {:e}", r.max_residual);
    if let Some(p) = &r.worst_point {
        let _ = writeln!(out, "  worst point:  {p:?}");
    }
    for c in &r.checks {
        let _ = writeln!(
            out,
            "  check {:<18} max = {:<24e} {}",
            c.name,
            c.max,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    if let Some(t) = &outcome.table {
        let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let widths: Vec<usize> = (0..t.header.len())
            .map(|k| cells.iter().map(|r| r[k].len()).chain([t.header[k].len()]).max().unwrap_or(0))
            .collect();
        out.push('\n');
        let line = |vals: &[String]| {
            vals.iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", line(&t.header));
        for row in &cells {
            let _ = writeln!(out, "{}", line(row));
        }
    }
    out
}
