use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => render_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

const MIN_SIG_DIGITS: i32 = 6;

/// Shortest round-trip decimal, padded with zeros to at least six
/// significant digits.
fn render_num(x: f64) -> String {
    let shortest = format!("{x}");
    if x == 0.0 || !x.is_finite() {
        return shortest;
    }
    let sig = shortest
        .trim_start_matches('-')
        .trim_start_matches(['0', '.'])
        .chars()
        .filter(char::is_ascii_digit)
        .count() as i32;
    if sig >= MIN_SIG_DIGITS {
        return shortest;
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (MIN_SIG_DIGITS - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// A CSV table; `name` becomes the file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
    }
}

/// Machine-readable result of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl RunSummary {
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(serde_json::Value::as_f64)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary is serializable");
        s.push('\n');
        s
    }
}

/// SHA-256 of the parsed configuration. Independent of key order,
/// formatting and comments in the source document.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config is serializable");
    Sha256::digest(&canonical)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes `<dir>/<table>.csv` for each table and `<dir>/summary.json`.
pub fn emit_outputs(
    summary: &RunSummary,
    tables: &[DataTable],
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let io = |path: &Path, source: std::io::Error| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    for table in tables {
        let path = dir.join(format!("{}.csv", table.name));
        let text = table.to_csv().map_err(|e| io(&path, e.into()))?;
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    fs::write(&path, summary.to_json()).map_err(|e| io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_blank_for_missing() {
        let mut t = DataTable::new("t", &["a", "b", "c"]);
        t.push(vec![0.1.into(), Cell::Empty, true.into()]);
        t.push(vec![2.5e-9.into(), 7u64.into(), false.into()]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "a,b,c\n0.100000,,true\n0.00000000250000,7,false\n");
    }

    #[test]
    fn numbers_keep_six_digits() {
        assert_eq!(render_num(25.0), "25.0000");
        assert_eq!(render_num(-0.5), "-0.500000");
        assert_eq!(render_num(1e9), "1000000000");
        assert_eq!(render_num(0.0), "0");
        assert_eq!(render_num(132.73091330123), "132.73091330123");
        for x in [
            0.873362445414847,
            3.394138020144e-6,
            1.0 / 3.0,
            144.0,
            1e-300,
        ] {
            assert_eq!(render_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn hash_ignores_key_order() {
        let a =
            super::super::parse_config("scenario = chsh\nseed = 3\nchsh.n_events = 10\n").unwrap();
        let b = super::super::parse_config("chsh.n_events = 10\n# x\nseed=3\nscenario = chsh\n")
            .unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let c =
            super::super::parse_config("scenario = chsh\nseed = 4\nchsh.n_events = 10\n").unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }
}
