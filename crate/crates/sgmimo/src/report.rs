//! CSV output: comma-separated, header row, LF line endings, numbers at a
//! fixed count of significant digits, preceded by `# ` provenance lines that
//! hold the canonical scenario config.

use std::io::Write;
use std::path::Path;

use crate::config::ScenarioConfig;
use crate::{Error, Result};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
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

/// `x` rounded to `digits` significant digits, printed in the shortest form
/// that reads back to the rounded value.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{:.*e}", digits.saturating_sub(1), x).parse().expect("formatted float");
    if r == 0.0 || (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

impl Cell {
    fn render(&self, digits: usize) -> String {
        match self {
            Cell::Num(v) => format_sig(*v, digits),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// A table awaiting output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes the table; `provenance` lines (if any) go first, each behind
    /// `# `.
    pub fn write<W: Write>(&self, out: W, provenance: Option<&str>, digits: usize) -> Result<()> {
        let mut out = out;
        if let Some(p) = provenance {
            for line in p.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|c| c.render(digits)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, provenance: Option<&str>, digits: usize) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf, provenance, digits)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn write_file(&self, path: &Path, provenance: Option<&str>, digits: usize) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(f, provenance, digits)
    }
}

/// Provenance block for a run: a comment naming the producer, then the
/// canonical config.
pub fn provenance(cfg: &ScenarioConfig) -> String {
    format!("# sgmimo {}\n{}", env!("CARGO_PKG_VERSION"), cfg.to_text())
}

/// Recovers the config from the provenance lines of a CSV written by
/// [`Table::write`].
pub fn config_from_csv(text: &str) -> Result<ScenarioConfig> {
    let header: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.strip_prefix("# ").unwrap_or(&l[1..]))
        .flat_map(|l| [l, "\n"])
        .collect();
    ScenarioConfig::parse(&header)
}
