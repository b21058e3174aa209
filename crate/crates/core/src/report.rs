//! Tables rendered as CSV (raw values) or aligned text (scaled for reading).

use std::fmt::{self, Write as _};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::RegretValue;

/// Token written for an infinite regret.
pub const INF_TOKEN: &str = "inf";

/// Multiplier applied to regret cells in the text rendering.
pub const REGRET_SCALE: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Number(f64),
    /// A rate stored as a fraction, shown as a percentage in text.
    Fraction(f64),
    Regret(RegretValue),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => csv_escape(s),
            Cell::Int(n) => n.to_string(),
            Cell::Number(x) | Cell::Fraction(x) => x.to_string(),
            Cell::Regret(RegretValue::Finite(x)) => x.to_string(),
            Cell::Regret(RegretValue::Infinite) => INF_TOKEN.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn display(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Number(x) => format!("{x:.6}"),
            Cell::Fraction(x) => format!("{:.3}%", 100.0 * x),
            Cell::Regret(RegretValue::Finite(x)) => format!("{:.4}", REGRET_SCALE * x),
            Cell::Regret(RegretValue::Infinite) => INF_TOKEN.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn right_aligned(&self) -> bool {
        !matches!(self, Cell::Text(_))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<RegretValue> for Cell {
    fn from(r: RegretValue) -> Self {
        Cell::Regret(r)
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A rectangular table with a title and free-form notes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub title: String,
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl ReportTable {
    pub fn new<S: Into<String>>(
        title: impl Into<String>,
        headers: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            title: title.into(),
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(Error::LengthMismatch {
                what: "table row",
                got: row.len(),
                expected: self.headers.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    fn has_regret(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .any(|c| matches!(c, Cell::Regret(_)))
    }

    /// Header line plus one line per row, values unscaled.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let line = |cells: Vec<String>| cells.join(",") + "\n";
        out.push_str(&line(self.headers.iter().map(|h| csv_escape(h)).collect()));
        for row in &self.rows {
            out.push_str(&line(row.iter().map(Cell::csv).collect()));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Column-aligned text; regret cells multiplied by [`REGRET_SCALE`].
    pub fn to_text(&self) -> String {
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::display).collect())
            .collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.headers[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let _ = write!(out, "{}", self.title);
        if self.has_regret() {
            out.push_str(" (regret x 1e-4)");
        }
        out.push('\n');
        let header: Vec<String> = self
            .headers
            .iter()
            .zip(&widths)
            .map(|(h, &w)| format!("{h:<w$}"))
            .collect();
        out.push_str(header.join("  ").trim_end());
        out.push('\n');
        for (cells, row) in body.iter().zip(&self.rows) {
            let line: Vec<String> = cells
                .iter()
                .zip(row)
                .zip(&widths)
                .map(|((s, cell), &w)| {
                    if cell.right_aligned() {
                        format!("{s:>w$}")
                    } else {
                        format!("{s:<w$}")
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

impl fmt::Display for ReportTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
