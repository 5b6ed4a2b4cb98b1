//! Pass/fail tables and convergence tables written by the studies.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub label: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Rows of `(label, measured value, threshold, pass flag)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub name: String,
    pub rows: Vec<CheckRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn new(name: impl Into<String>) -> Self {
        ValidationReport { name: name.into(), rows: Vec::new(), warnings: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, measured: f64, threshold: f64, pass: bool) {
        self.rows.push(CheckRow { label: label.into(), measured, threshold, pass });
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{}: {msg}", self.name);
        self.warnings.push(msg);
    }

    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, label: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.rows.extend(other.rows);
        self.warnings.extend(other.warnings);
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub delta: f64,
    pub sup_error: f64,
    /// Time step actually used (0 for static studies).
    pub dt: f64,
    /// Stability bound that produced `dt` (0 for static studies).
    pub dt_bound: f64,
}

/// Rows of `(epsilon, delta, sup error, dt, dt bound)` plus derived gates.
///
/// Wall time is kept out of the rows so that identical configurations produce
/// bit-identical tables; it lives in the run manifest instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub name: String,
    pub rows: Vec<ConvergenceRow>,
    pub checks: ValidationReport,
}

impl ConvergenceReport {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        ConvergenceReport { checks: ValidationReport::new(name.clone()), name, rows: Vec::new() }
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    /// Whether the error column strictly decreases down the table.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error)
    }

    /// Successive error ratios `e_k / e_{k+1}`.
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[0].sup_error / w[1].sup_error).collect()
    }

    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.checks.rows.iter().all(|r| r.pass)
    }
}

/// Anything that can be written as a CSV table with a header row.
pub trait CsvTable {
    fn header(&self) -> Vec<String>;
    fn records(&self) -> Vec<Vec<String>>;
}

impl CsvTable for ConvergenceReport {
    fn header(&self) -> Vec<String> {
        ["epsilon", "delta", "sup_error", "dt", "dt_bound"].iter().map(|s| s.to_string()).collect()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                [r.epsilon, r.delta, r.sup_error, r.dt, r.dt_bound]
                    .iter()
                    .map(|v| format!("{v:e}"))
                    .collect()
            })
            .collect()
    }
}

impl CsvTable for ValidationReport {
    fn header(&self) -> Vec<String> {
        ["label", "measured", "threshold", "pass"].iter().map(|s| s.to_string()).collect()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    format!("{:e}", r.measured),
                    format!("{:e}", r.threshold),
                    r.pass.to_string(),
                ]
            })
            .collect()
    }
}

/// Write any table as CSV with a header naming every column.
pub fn write_report(table: &impl CsvTable, path: &Path) -> Result<()> {
    let header = table.header();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&header)?;
    for rec in table.records() {
        if rec.len() != header.len() {
            return Err(Error::InvalidArgument(format!(
                "record with {} columns under a {}-column header",
                rec.len(),
                header.len()
            )));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
