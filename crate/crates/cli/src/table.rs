use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

/// Seventeen significant digits in scientific notation; round-trips any
/// `f64` and never depends on locale.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table with a `#`-prefixed metadata preamble.
#[derive(Debug, Clone)]
pub struct Table {
    preamble: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            preamble: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.preamble.push(line.into());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(row, column)` of every NaN or infinite value.
    pub fn non_finite(&self) -> Vec<(usize, &'static str)> {
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if matches!(cell, Cell::Float(x) if !x.is_finite()) {
                    out.push((r, self.columns[c]));
                }
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for line in &self.preamble {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    Cell::Int(x) => x.to_string(),
                    Cell::Float(x) => format_float(*x),
                    Cell::Text(t) => t.clone(),
                    Cell::Empty => String::new(),
                })
                .collect();
            let _ = writeln!(s, "{}", fields.join(","));
        }
        s
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render())
    }
}
