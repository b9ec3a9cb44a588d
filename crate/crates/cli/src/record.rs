use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// One line of output per invocation.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    /// SHA-256 of every input file, keyed by its flag name.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub parameters: Value,
    pub outputs: Value,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub command: String,
    pub error: String,
}

/// Header plus rows, written as plain comma-separated text.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let io = |source| CliError::Io { path: path.to_path_buf(), source };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(f, "{}", self.header.join(",")).map_err(io)?;
        for r in &self.rows {
            writeln!(f, "{}", r.join(",")).map_err(io)?;
        }
        f.flush().map_err(io)
    }
}

/// Formats a float for CSV; infinities and NaN spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_are_spelled_out() {
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(0.25), "0.25");
    }

    #[test]
    fn table_round_trip() {
        let dir = std::env::temp_dir().join(format!("nitk-table-{}", std::process::id()));
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.5)]);
        t.write(&dir).unwrap();
        assert_eq!(std::fs::read_to_string(&dir).unwrap(), "a,b\n1,0.5\n");
        std::fs::remove_file(dir).unwrap();
    }
}
