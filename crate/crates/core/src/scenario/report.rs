use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use serde::Serialize;

use super::config::Outputs;
use crate::error::{BqmError, Result};

/// One named invariant check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Verdicts of every check run for a scenario. `overall` holds iff every
/// check passes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub scenario: String,
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl InvariantReport {
    pub fn new(scenario: impl Into<String>) -> Self {
        InvariantReport {
            scenario: scenario.into(),
            checks: Vec::new(),
            overall: true,
        }
    }

    /// Adds a check. NaN deviations fail.
    pub fn push(&mut self, name: impl Into<String>, max_deviation: f64, threshold: f64) {
        let pass = max_deviation <= threshold;
        self.overall &= pass;
        self.checks.push(Check {
            name: name.into(),
            max_deviation,
            threshold,
            pass,
        });
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check, for terminal output.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<40} {:>12.3e} <= {:.1e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.max_deviation,
                c.threshold
            );
        }
        let _ = writeln!(out, "overall: {}", if self.overall { "pass" } else { "fail" });
        out
    }
}

/// Running maxima keyed by check name, in first-seen order.
#[derive(Clone, Debug, Default)]
pub(crate) struct MaxTracker {
    entries: Vec<(String, f64, f64)>,
}

impl MaxTracker {
    pub(crate) fn record(&mut self, name: &str, threshold: f64, value: f64) {
        match self.entries.iter_mut().find(|e| e.0 == name) {
            Some(e) => {
                if value.is_nan() || value > e.2 {
                    e.2 = value;
                }
            }
            None => self.entries.push((name.to_string(), threshold, value)),
        }
    }

    pub(crate) fn into_report(self, scenario: impl Into<String>) -> InvariantReport {
        let mut report = InvariantReport::new(scenario);
        for (name, threshold, value) in self.entries {
            report.push(name, value, threshold);
        }
        report
    }
}

/// Mean of one observable in the three descriptions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableMeans {
    pub schrodinger: f64,
    pub heisenberg: f64,
    pub bundle: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub purity: f64,
    pub min_eig: f64,
    /// Same order as [`TraceTable::observables`].
    pub means: Vec<ObservableMeans>,
    pub gap_formulation: f64,
    pub gap_picture: f64,
    pub gap_heisenberg_const: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    pub observables: Vec<String>,
    pub rows: Vec<TraceRow>,
}

/// Seventeen significant digits.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl TraceTable {
    pub fn header(&self) -> Vec<String> {
        let mut cols: Vec<String> = ["t", "trace_re", "trace_im", "purity", "min_eig"].map(String::from).to_vec();
        for name in &self.observables {
            for picture in ["schrodinger", "heisenberg", "bundle"] {
                cols.push(format!("{name}_{picture}"));
            }
        }
        cols.extend(["gap_formulation", "gap_picture", "gap_heisenberg_const"].map(String::from));
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for r in &self.rows {
            let mut fields = vec![r.t, r.trace_re, r.trace_im, r.purity, r.min_eig];
            for m in &r.means {
                fields.extend([m.schrodinger, m.heisenberg, m.bundle]);
            }
            fields.extend([r.gap_formulation, r.gap_picture, r.gap_heisenberg_const]);
            let line: Vec<String> = fields.into_iter().map(fmt_f64).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn write_file(dir: &FsPath, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| BqmError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| BqmError::Io { path, source })
}

/// Writes the trace CSV and the report JSON into `out_dir`, overwriting any
/// previous files.
pub fn write_traces(table: &TraceTable, report: &InvariantReport, out_dir: &FsPath, outputs: &Outputs) -> Result<()> {
    write_file(out_dir, &outputs.traces, &table.to_csv())?;
    write_report(report, out_dir, &outputs.report)
}

pub fn write_report(report: &InvariantReport, out_dir: &FsPath, name: &str) -> Result<()> {
    write_file(out_dir, name, &report.to_json())
}
