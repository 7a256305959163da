//! CSV tables and JSON run manifests.

use std::fs;
use std::io;
use std::path::Path;

use apmc_core::stochastic::RvLedger;
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// 17 significant digits, enough to round-trip an f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerSummary {
    pub n_uniform: u64,
    pub n_gaussian: u64,
    pub n_total_equivalent: f64,
}

impl From<RvLedger> for LedgerSummary {
    fn from(l: RvLedger) -> Self {
        Self { n_uniform: l.n_uniform, n_gaussian: l.n_gaussian, n_total_equivalent: l.total() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub config: &'a ExperimentConfig,
    pub seed: u64,
    pub ledger: LedgerSummary,
    pub elapsed_s: f64,
    pub tool_version: &'static str,
}

/// Write `tables` as `<name>.csv` and the manifest as `<command>.manifest.json`.
pub fn write_run(
    dir: &Path,
    command: &str,
    tables: &[(String, Table)],
    manifest: &Manifest<'_>,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, table) in tables {
        fs::write(dir.join(format!("{name}.csv")), table.to_csv())?;
    }
    let json = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    fs::write(dir.join(format!("{command}.manifest.json")), json + "\n")
}
