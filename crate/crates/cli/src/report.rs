//! Report and table emission.
//!
//! One JSON document per run with a stable schema version; CSV files with
//! a one-line header per table. Everything except `wall_time_ms` is a
//! deterministic function of (config, seed).

use crate::config::Config;
use crate::Result;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One pipeline stage: a label, its pass flag, and named scalars.
#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub label: String,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
}

impl Stage {
    pub fn new(label: &str, pass: bool) -> Self {
        Stage {
            label: label.to_string(),
            pass,
            details: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub config: Config,
    pub verdict: Verdict,
    pub stages: Vec<Stage>,
    pub tables: BTreeMap<String, Table>,
    pub wall_time_ms: f64,
}

impl ExperimentReport {
    pub fn pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Writes `<experiment>_report.json` plus one CSV per table; returns
    /// the report path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let report_path = dir.join(format!("{}_report.json", self.experiment));
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(&report_path, json)?;
        for (name, table) in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, name));
            let mut f = std::fs::File::create(path)?;
            writeln!(f, "{}", table.header.join(","))?;
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                writeln!(f, "{}", line.join(","))?;
            }
        }
        Ok(report_path)
    }
}
