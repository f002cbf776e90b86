use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// `measured <= bound + tolerance`.
    Upper,
    /// `|measured - bound| <= tolerance`.
    Equal,
}

/// One measured quantity compared against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub measured: f64,
    pub bound: f64,
    /// `bound - measured`.
    pub slack: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl Check {
    pub fn upper(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        let slack = bound - measured;
        Self { name: name.into(), kind: CheckKind::Upper, measured, bound, slack, tolerance, holds: slack >= -tolerance }
    }

    pub fn equal(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> Self {
        let slack = bound - measured;
        Self { name: name.into(), kind: CheckKind::Equal, measured, bound, slack, tolerance, holds: slack.abs() <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    /// Full effective configuration, defaults included.
    pub config: Value,
    pub seed: Option<u64>,
    pub results: Value,
    pub checks: Vec<Check>,
    pub all_hold: bool,
    pub wall_time_secs: f64,
}

impl RunReport {
    pub fn new(command: &str, config: Value, seed: Option<u64>, results: Value, checks: Vec<Check>) -> Self {
        let all_hold = checks.iter().all(|c| c.holds);
        Self { schema_version: SCHEMA_VERSION, command: command.into(), config, seed, results, checks, all_hold, wall_time_secs: 0.0 }
    }

    /// The report with the wall time zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_secs: 0.0, ..self.clone() }
    }
}

/// Rows for `--csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Self { headers, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
