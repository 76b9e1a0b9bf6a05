//! Report documents and their JSON / CSV encodings.

use std::fs;
use std::path::Path;

use eqp_core::global::RandomMatrix;
use eqp_core::{CMat, C64};
use serde::Serialize;
use serde_json::Value;

use crate::config::matrix_to_json;
use crate::CliError;

pub const TOOL: &str = "eqp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Equal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, comparison: Comparison::AtMost, passed: value <= threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold, comparison: Comparison::AtLeast, passed: value >= threshold }
    }

    pub fn equal(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Check { name: name.into(), value, threshold: expected, comparison: Comparison::Equal, passed: value == expected }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check::equal(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

/// Column table written as CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|x| format!("{x:e}"))).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input_digest: String,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub series: Option<Series>,
}

impl Report {
    pub fn new(command: &str, input_digest: String, results: Value, checks: Vec<Check>, series: Option<Series>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Report { tool: TOOL, version: VERSION, command: command.into(), input_digest, results, checks, passed, series }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Series if present, otherwise the check table.
    pub fn to_csv(&self) -> Result<String, CliError> {
        match &self.series {
            Some(s) => s.to_csv(),
            None => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["name", "value", "threshold", "comparison", "passed"]).map_err(io_err)?;
                for c in &self.checks {
                    let cmp = serde_json::to_value(c.comparison).expect("serializes");
                    w.write_record([
                        c.name.clone(),
                        format!("{:e}", c.value),
                        format!("{:e}", c.threshold),
                        cmp.as_str().unwrap_or_default().to_string(),
                        c.passed.to_string(),
                    ])
                    .map_err(io_err)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
                Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
            }
        }
    }

    /// `report.json` and, when a series exists, `series.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let put = |name: &str, body: String| {
            let p = dir.join(name);
            fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        };
        put("report.json", self.to_json())?;
        if let Some(s) = &self.series {
            put("series.csv", s.to_csv()?)?;
        }
        Ok(())
    }
}

pub fn c(z: C64) -> Value {
    Value::from(vec![z.re, z.im])
}

pub fn cs(zs: &[C64]) -> Value {
    Value::from(zs.iter().map(|&z| c(z)).collect::<Vec<_>>())
}

pub fn mat(m: &CMat) -> Value {
    serde_json::to_value(matrix_to_json(m)).expect("matrix serializes")
}

pub fn blocks(x: &RandomMatrix) -> Value {
    Value::from(x.blocks.iter().map(mat).collect::<Vec<_>>())
}

/// JSON cannot carry infinities; they become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}
