//! Tabular output in CSV, JSON and aligned plain text.
//!
//! CSV floats are written with 17 significant digits (`{:.16e}`), JSON floats
//! with the shortest representation that round-trips. Both are lossless.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::cmcheck::CMScanReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Human,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Human => "txt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// `{:.16e}`, i.e. 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.10e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => "-".to_string(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_u64(*v),
            Cell::Float(v) => s.serialize_f64(*v),
            Cell::Text(v) => s.serialize_str(v),
            Cell::Empty => s.serialize_none(),
        }
    }
}

/// Rows of cells under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

struct Record<'a>(&'a [&'static str], &'a [Cell]);

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&Record(&self.columns, row))?;
        }
        seq.end()
    }
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// An array of objects whose keys follow the column order.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serialization");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::human).collect())
            .collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
            let parts: Vec<String> = cells.zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &mut self.columns.iter().copied());
        for row in &body {
            line(&mut out, &mut row.iter().map(String::as_str));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Human => self.to_human(),
        }
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> io::Result<()> {
        w.write_all(self.render(format).as_bytes())
    }
}

/// One record per scanned `(n, x)`: `n,x,value,method`.
pub fn scan_samples(report: &CMScanReport) -> Table {
    let mut t = Table::new(&["n", "x", "value", "method"]);
    for s in &report.samples {
        t.push(vec![
            s.n.into(),
            s.x.into(),
            s.value.into(),
            s.method.as_str().into(),
        ]);
    }
    t
}

/// Per-order minima: `n,min_value,argmin_x`.
pub fn scan_minima(report: &CMScanReport) -> Table {
    let mut t = Table::new(&["n", "min_value", "argmin_x"]);
    for o in &report.per_order {
        t.push(vec![o.n.into(), o.min_value.into(), o.argmin_x.into()]);
    }
    t
}

/// Verdict, grid, tolerance, per-order minima and witness as pretty JSON.
pub fn scan_summary_json(report: &CMScanReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization");
    s.push('\n');
    s
}

/// The summary as indented text followed by the minima table.
pub fn scan_summary_human(report: &CMScanReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "family:    {}", report.family);
    let _ = writeln!(
        out,
        "grid:      {} log points on [{}, {}], n = 0..={}",
        report.grid.points, report.grid.lo, report.grid.hi, report.max_order
    );
    let _ = writeln!(out, "tolerance: {:e} (relative to term scale)", report.tolerance);
    let _ = writeln!(out, "verdict:   {:?}", report.verdict);
    match &report.witness {
        Some(w) => {
            let _ = writeln!(out, "witness:   n = {}, x = {}, value = {:e}", w.n, w.x, w.value);
        }
        None => out.push_str("witness:   none\n"),
    }
    out.push('\n');
    out.push_str(&scan_minima(report).to_human());
    out
}
