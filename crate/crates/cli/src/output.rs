//! Tables and their renderings.
//!
//! Files (csv, tsv, json) carry full precision: every float is written in
//! Rust's shortest round-trip form, so output is byte-deterministic. The
//! `table` format is for terminals and rounds to 2 decimals, half away from
//! zero.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned text, 2 decimals.
    Table,
    Csv,
    Json,
    /// Tab separated, for plotting tools.
    Tsv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    /// A number shown in scientific notation in `table` output.
    Sci(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
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
        Cell::Text(if v { "pass" } else { "FAIL" }.to_string())
    }
}

impl Cell {
    fn full(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) | Cell::Sci(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn rounded(&self) -> String {
        match self {
            Cell::Num(v) => round_half_away(*v, 2),
            Cell::Sci(v) => format!("{v:.4e}"),
            other => other.full(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) | Cell::Sci(v) if v.is_finite() => json!(v),
            Cell::Num(v) | Cell::Sci(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Decimal rounding of the shortest decimal form of `x`, ties away from zero.
///
/// Rounding the decimal string rather than `x * 10^dp` keeps 0.285 at 0.29
/// even though `0.285 * 100` is 28.499999999999996 in binary.
pub fn round_half_away(x: f64, dp: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = format!("{:.*}", dp + 6, x.abs());
    let (int_part, frac) = digits.split_once('.').unwrap_or((&digits, ""));
    let mut kept: Vec<u8> = int_part.bytes().chain(frac.bytes().take(dp)).map(|b| b - b'0').collect();
    if frac.as_bytes().get(dp).is_some_and(|&b| b >= b'5') {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let split = kept.len() - dp;
    let int: String = kept[..split].iter().map(|d| char::from(b'0' + d)).collect();
    let frac: String = kept[split..].iter().map(|d| char::from(b'0' + d)).collect();
    let negative = x < 0.0 && kept.iter().any(|&d| d != 0);
    let sign = if negative { "-" } else { "" };
    if dp == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Provenance fields for JSON (seed, config hash, command).
    pub meta: Vec<(String, Value)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(mut self, key: &str, value: Value) -> Self {
        self.meta.push((key.to_string(), value));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_text(),
            Format::Csv => self.render_delimited(b','),
            Format::Tsv => self.render_delimited(b'\t'),
            Format::Json => self.render_json(),
        }
    }

    fn render_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::rounded).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &[String]| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            out.push_str(padded.join("  ").trim_end());
            out.push('\n');
        };
        line(&mut out, &self.columns);
        for r in &cells {
            line(&mut out, r);
        }
        out
    }

    fn render_delimited(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::full)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    fn render_json(&self) -> String {
        let mut top = Map::new();
        for (k, v) in &self.meta {
            top.insert(k.clone(), v.clone());
        }
        top.insert("columns".into(), json!(self.columns));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
            .collect();
        top.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json values");
        s.push('\n');
        s
    }
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}
