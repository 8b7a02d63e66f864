use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed-format number: 9 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.8e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

/// Result of one subcommand before it is written out.
#[derive(Debug)]
pub struct Run {
    pub name: String,
    pub table: Table,
    /// Resolved parameter set(s).
    pub params: Value,
    pub grids: BTreeMap<String, String>,
    /// Scalar outcomes worth reading without parsing the CSV.
    pub results: Value,
    pub warnings: Vec<String>,
    /// One line for stderr.
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    /// Arguments that reproduce the run, without `--out` and `--workers`.
    pub argv: Vec<String>,
    pub params: Value,
    pub grids: BTreeMap<String, String>,
    pub results: Value,
    pub tool_version: String,
    pub duration_s: f64,
    pub warnings: Vec<String>,
    pub csv: String,
}

impl RunManifest {
    pub fn new(run: &Run, subcommand: &str, argv: Vec<String>, duration_s: f64) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.into(),
            argv,
            params: run.params.clone(),
            grids: run.grids.clone(),
            results: run.results.clone(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            duration_s,
            warnings: run.warnings.clone(),
            csv: format!("{}.csv", run.name),
        }
    }
}

/// Writes `<name>.csv` and `<name>.manifest.json` into `dir`.
pub fn write_bundle(dir: &Path, run: &Run, manifest: &RunManifest) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", run.name));
    let json = dir.join(format!("{}.manifest.json", run.name));
    std::fs::write(&csv, run.table.to_csv())?;
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&json, text)?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.00000000e-1");
        assert_eq!(num(-36.95), "-3.69500000e1");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![num(1.0), String::new()]);
        assert_eq!(t.to_csv(), "a,b\n1.00000000e0,\n");
    }
}
