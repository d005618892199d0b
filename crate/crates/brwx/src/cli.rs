//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use crate::config::{parse_kv, ConfigError, Experiment, ExperimentConfig};
use crate::experiments::{self, RunError};
use crate::report::{ExperimentReport, VERSION};

/// Process exit statuses beyond the experiment verdicts.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    /// Bad flags, config keys or values.
    pub const USAGE: i32 = 64;
    /// Internal error during a run.
    pub const SOFTWARE: i32 = 70;
    /// Report could not be written.
    pub const IO: i32 = 74;
}

/// Run a branching-random-walk verification experiment.
///
/// Settings come from the experiment's defaults, then the config file, then
/// flags. Reports go to `<out>/<experiment>.json` and `.csv`.
#[derive(Debug, Parser)]
#[command(name = "brwx", version = VERSION)]
pub struct Cli {
    /// Experiment name; optional if the config file sets `experiment`.
    pub experiment: Option<String>,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Pareto tail index of the displacements.
    #[arg(long, conflicts_with = "r")]
    pub beta: Option<String>,
    /// Weibull hazard index (or the constants table's r).
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub replicates: Option<String>,
    #[arg(long)]
    pub cap: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Output directory [default: $BRWX_OUT_DIR, else ./brwx-out].
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads [default: available cores]; never changes results.
    #[arg(long)]
    pub threads: Option<String>,
    /// Population size at which surrogate paths leave exact simulation.
    #[arg(long)]
    pub surrogate_switch: Option<String>,
    /// Comma-separated increasing threshold grid.
    #[arg(long)]
    pub thresholds: Option<String>,
    /// pareto, weibull, gaussian or exponential.
    #[arg(long)]
    pub displacement: Option<String>,
    /// Weibull hazard constant or exponential rate.
    #[arg(long)]
    pub scale: Option<String>,
    /// Order-statistic depth in (0, 1].
    #[arg(long)]
    pub delta: Option<String>,
    /// Geometric ratio a in (0, 1).
    #[arg(long)]
    pub ratio: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let flags: [(&'static str, &Option<String>); 16] = [
            ("alpha", &self.alpha),
            ("beta_or_r", &self.beta),
            ("beta_or_r", &self.r),
            ("n", &self.n),
            ("k", &self.k),
            ("replicates", &self.replicates),
            ("cap", &self.cap),
            ("master_seed", &self.seed),
            ("output", &self.out),
            ("threads", &self.threads),
            ("surrogate_switch", &self.surrogate_switch),
            ("thresholds", &self.thresholds),
            ("displacement", &self.displacement),
            ("scale", &self.scale),
            ("delta", &self.delta),
            ("ratio", &self.ratio),
        ];
        flags
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Resolve the configuration: defaults < file < flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let file_pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_kv(&text)?
            }
            None => Vec::new(),
        };
        let named = |v: &str| -> Result<Experiment, ConfigError> {
            v.parse().map_err(|reason| ConfigError::InvalidValue {
                field: "experiment",
                value: v.to_owned(),
                reason,
            })
        };
        let experiment = match (&self.experiment, file_pairs.iter().find(|(k, _)| k == "experiment")) {
            (Some(e), _) => named(e)?,
            (None, Some((_, e))) => named(e)?,
            (None, None) => return Err(ConfigError::MissingExperiment),
        };
        let mut config = ExperimentConfig::defaults(experiment);
        for (k, v) in file_pairs.iter().filter(|(k, _)| k != "experiment") {
            config.set(k, v)?;
        }
        for (k, v) in self.overrides() {
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn summarize(report: &ExperimentReport) {
    for c in &report.aggregates {
        let verdict = match (c.informational, c.pass) {
            (true, _) => "info",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_owned(), |v| format!("{v:.6}"));
        println!(
            "{verdict:4} {:32} statistic={} target={} tolerance={}",
            c.name,
            fmt(c.statistic),
            fmt(c.target),
            fmt(c.tolerance)
        );
    }
    println!(
        "{}: {:?} ({} replicates, {} truncated, {:.1}s)",
        report.experiment, report.status, report.replicates, report.truncation_count, report.wall_time_s
    );
}

/// Parse `args`, run the experiment, write the report and return the exit
/// status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::PASS,
                _ => exit::USAGE,
            };
        }
    };
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e @ ConfigError::Io { .. }) => {
            eprintln!("error: {e}");
            return exit::IO;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
    };
    let report = match experiments::run(&config) {
        Ok(r) => r,
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return exit::SOFTWARE;
        }
    };
    let dir = config.output_dir();
    match report.write_to(&dir) {
        Ok((json, csv)) => log::info!("wrote {} and {}", json.display(), csv.display()),
        Err(e) => {
            eprintln!("error: writing report to {}: {e}", dir.display());
            return exit::IO;
        }
    }
    summarize(&report);
    report.status.exit_code()
}
