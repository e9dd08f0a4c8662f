//! Solve reports: JSON serialization, CSV tables, and verified reloading.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{
    Algorithm, ExperimentLog, ExtractedPair, Mode, ResourceCounters, Schedule,
};
use crate::hhl::HhlResult;
use crate::numerics::relative_error;
use crate::reconstruction::SignPattern;

use super::problem::InputForm;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "experiment,iteration,ancilla,omega,outcome,probability";
const EPSILON_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid report JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("stored epsilon {stored} for {algorithm} does not match recomputed {recomputed}")]
    EpsilonMismatch { algorithm: Algorithm, stored: f64, recomputed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub mode: Mode,
}

impl Provenance {
    pub fn current(mode: Mode) -> Self {
        Self { tool: env!("CARGO_PKG_NAME").to_string(), version: env!("CARGO_PKG_VERSION").to_string(), mode }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub m: u32,
    pub dim: usize,
    pub eigenvalues: usize,
    pub input: InputForm,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HipeaRun {
    pub pairs: Vec<ExtractedPair>,
    pub resources: ResourceCounters,
    pub schedule: Schedule,
    pub u_abs: Vec<Vec<f64>>,
    pub signs: SignPattern,
    /// `(gap, threshold)` when the sign pattern was not clearly separated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_ambiguity: Option<(f64, f64)>,
    pub x: Vec<f64>,
    pub epsilon: f64,
    pub experiments: Vec<ExperimentLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhlRun {
    #[serde(flatten)]
    pub result: HhlResult,
    /// `||x||` of the reference solution; the normalized output cannot carry it.
    pub reference_norm: f64,
    /// `|| x/||x|| - x_normalized ||` against the reference solution.
    pub normalized_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hipea: Option<HipeaRun>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hhl: Option<HhlRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub problem: ProblemSummary,
    pub reference_x: Vec<f64>,
    pub runs: Vec<RunReport>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn has_ambiguity(&self) -> bool {
        self.runs.iter().any(|r| r.hipea.as_ref().is_some_and(|h| h.sign_ambiguity.is_some()))
    }

    pub fn run(&self, algorithm: Algorithm) -> Option<&RunReport> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let report: Self = serde_json::from_str(text)?;
        report.verify()?;
        Ok(report)
    }

    fn verify(&self) -> Result<(), ReportError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ReportError::SchemaVersion(self.schema_version));
        }
        for run in &self.runs {
            if let Some(h) = &run.hipea {
                let recomputed = relative_error(&self.reference_x, &h.x).unwrap_or(f64::NAN);
                if (recomputed - h.epsilon).abs().is_nan() || (recomputed - h.epsilon).abs() > EPSILON_TOL {
                    return Err(ReportError::EpsilonMismatch {
                        algorithm: run.algorithm,
                        stored: h.epsilon,
                        recomputed,
                    });
                }
            }
        }
        Ok(())
    }
}

/// CSV rendering of experiment logs, one row per logged outcome. Ancillas
/// whose reading is not logged get a row with empty outcome and probability.
pub fn csv_table(experiments: &[ExperimentLog]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for exp in experiments {
        for rec in &exp.records {
            for setting in &rec.settings {
                let cells: Vec<_> = rec.outcomes.iter().filter(|c| c.ancilla == setting.ancilla).collect();
                if cells.is_empty() {
                    let _ = writeln!(out, "{},{},{},{},,", exp.experiment, rec.iteration, setting.ancilla, setting.omega);
                }
                for c in cells {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{:.5}",
                        exp.experiment, rec.iteration, setting.ancilla, setting.omega, c.path, c.probability.max(0.0)
                    );
                }
            }
        }
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    std::fs::write(path, contents).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })
}

/// Writes the report. CSV output goes to `path` when the report holds at most
/// one extraction run, and to `<stem>-<algorithm>.csv` files otherwise.
/// Returns the files written.
pub fn emit_report(report: &SolveReport, format: ReportFormat, path: &Path) -> Result<Vec<PathBuf>, ReportError> {
    match format {
        ReportFormat::Json => {
            write_file(path, &report.to_json())?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Csv => {
            let runs: Vec<_> = report.runs.iter().filter_map(|r| r.hipea.as_ref().map(|h| (r.algorithm, h))).collect();
            if runs.len() <= 1 {
                let table = runs.first().map_or_else(|| csv_table(&[]), |(_, h)| csv_table(&h.experiments));
                write_file(path, &table)?;
                return Ok(vec![path.to_path_buf()]);
            }
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tables");
            let mut written = Vec::new();
            for (algorithm, h) in runs {
                let target = path.with_file_name(format!("{stem}-{algorithm}.csv"));
                write_file(&target, &csv_table(&h.experiments))?;
                written.push(target);
            }
            Ok(written)
        }
    }
}

pub fn load_report(path: &Path) -> Result<SolveReport, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })?;
    SolveReport::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_log_gives_header_only() {
        assert_eq!(csv_table(&[]), format!("{CSV_HEADER}\n"));
    }
}
