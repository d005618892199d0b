//! Experiment reports: one JSON document and a flat CSV of per-replicate rows.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};

/// Version string embedded in every report.
pub const VERSION: &str = env!("BRWX_VERSION");

/// Overall verdict of an experiment, mapped onto the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// More than half of the fixed-depth replicates hit the population cap.
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

/// One aggregate comparison between simulation output and a limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Which limit statement the check exercises.
    pub provenance: String,
    /// How the statistic was computed and judged.
    pub method: String,
    pub statistic: Option<f64>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    /// Confidence interval of the statistic, where one is computed.
    pub interval: Option<[f64; 2]>,
    pub n_samples: usize,
    pub pass: bool,
    /// Informational checks are reported but do not affect the status.
    pub informational: bool,
    pub notes: String,
}

impl Check {
    pub fn new(name: impl Into<String>, provenance: &str, method: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            provenance: provenance.to_owned(),
            method: method.into(),
            statistic: None,
            target: None,
            tolerance: None,
            interval: None,
            n_samples: 0,
            pass: false,
            informational: false,
            notes: String::new(),
        }
    }

    /// `|statistic - target| <= tolerance * |target|`.
    pub fn relative(mut self, statistic: f64, target: f64, tolerance: f64) -> Self {
        self.statistic = finite(statistic);
        self.target = Some(target);
        self.tolerance = Some(tolerance);
        self.pass = (statistic - target).abs() <= tolerance * target.abs();
        self
    }

    /// `|statistic - target| <= tolerance`.
    pub fn absolute(mut self, statistic: f64, target: f64, tolerance: f64) -> Self {
        self.statistic = finite(statistic);
        self.target = Some(target);
        self.tolerance = Some(tolerance);
        self.pass = (statistic - target).abs() <= tolerance;
        self
    }

    /// `statistic < bound`.
    pub fn below(mut self, statistic: f64, bound: f64) -> Self {
        self.statistic = finite(statistic);
        self.tolerance = Some(bound);
        self.pass = statistic < bound;
        self
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = Some([lo, hi]);
        self
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    /// A check that could not be evaluated; it fails.
    pub fn unavailable(mut self, why: impl Into<String>) -> Self {
        self.pass = false;
        self.notes = why.into();
        self
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// A limit constant the experiment compares against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryTarget {
    pub name: String,
    pub value: f64,
    pub provenance: String,
}

impl TheoryTarget {
    pub fn new(name: impl Into<String>, value: f64, provenance: &str) -> Self {
        TheoryTarget {
            name: name.into(),
            value,
            provenance: provenance.to_owned(),
        }
    }
}

/// One replicate. Columns are fixed: `replicate, z_n_log, w_hat, m_n, ratio,
/// truncated`; the meaning of `ratio` depends on the experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub replicate: u64,
    /// Natural log of the last recorded population size.
    pub z_n_log: Option<f64>,
    /// `α^n log(Z_n + 1)` at the last recorded generation.
    pub w_hat: Option<f64>,
    /// Maximal position, or the selected order statistic.
    pub m_n: Option<f64>,
    pub ratio: Option<f64>,
    pub truncated: bool,
}

/// The stable-scale measurement used by surrogate experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationInfo {
    pub stable_scale: f64,
    pub theoretical_scale: f64,
    pub n_terms: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub version: String,
    /// Echo of the configuration, without thread count or output path.
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub status: Status,
    pub replicates: u64,
    pub truncation_count: u64,
    pub calibration: Option<CalibrationInfo>,
    pub theory_targets: Vec<TheoryTarget>,
    pub aggregates: Vec<Check>,
    pub rows: Vec<Row>,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(["replicate", "z_n_log", "w_hat", "m_n", "ratio", "truncated"])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    /// Write `<experiment>.json` and `<experiment>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.experiment));
        let csv = dir.join(format!("{}.csv", self.experiment));
        fs::write(&json, self.to_json())?;
        fs::write(&csv, self.to_csv()?)?;
        Ok((json, csv))
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.aggregates.iter().find(|c| c.name == name)
    }
}
