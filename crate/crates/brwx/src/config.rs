//! Experiment configuration: per-experiment defaults, a flat `key = value`
//! file format, command-line overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use brwx_core::population::{MAX_SWITCH_LOG_SIZE, MIN_SWITCH_LOG_SIZE};
use brwx_core::{DisplacementLaw, ProgenyLaw};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BRWX_OUT_DIR";
/// Largest `n` for `lemma_order_stats`; `2^26` draws take 512 MiB.
pub const MAX_ORDER_STATS_EXPONENT: u64 = 26;
/// Output directory used when neither `--out` nor the environment sets one.
pub const DEFAULT_OUT_DIR: &str = "brwx-out";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{field}`: {value:?} ({reason})")]
    InvalidValue {
        field: &'static str,
        value: String,
        reason: String,
    },
    #[error("`{field}` out of range: {reason}")]
    Domain { field: &'static str, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("no experiment given")]
    MissingExperiment,
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| {
                        let names: Vec<_> = $name::ALL.iter().map(|v| v.name()).collect();
                        format!("expected one of {}", names.join(", "))
                    })
            }
        }
    };
}

named_enum!(
    /// The verification experiments the runner knows about.
    Experiment {
        GwConvergence => "gw_convergence",
        MassConcentration => "mass_concentration",
        HeavyPointProcess => "heavy_point_process",
        FrechetMax => "frechet_max",
        CloudSpeedHeavy => "cloud_speed_heavy",
        LightTailRatio => "light_tail_ratio",
        CloudSpeedLight => "cloud_speed_light",
        LemmaOrderStats => "lemma_order_stats",
        LemmaHeavySums => "lemma_heavy_sums",
        LemmaRegvarSum => "lemma_regvar_sum",
        ConstantsTable => "constants_table",
    }
);

named_enum!(
    /// Displacement family; its parameters come from `beta_or_r` and `scale`.
    Displacement {
        Pareto => "pareto",
        Weibull => "weibull",
        Gaussian => "gaussian",
        Exponential => "exponential",
    }
);

impl Experiment {
    /// Branching-random-walk experiments with regularly varying steps.
    pub fn is_heavy_brw(self) -> bool {
        matches!(
            self,
            Experiment::HeavyPointProcess | Experiment::FrechetMax | Experiment::CloudSpeedHeavy
        )
    }

    /// Branching-random-walk experiments with light-tailed steps.
    pub fn is_light_brw(self) -> bool {
        matches!(self, Experiment::LightTailRatio | Experiment::CloudSpeedLight)
    }

    pub fn uses_surrogate(self) -> bool {
        matches!(self, Experiment::GwConvergence | Experiment::MassConcentration)
    }
}

/// Everything that determines an experiment's output, plus execution
/// settings (`threads`, `output`) that must not affect it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Moment index of the floor-Pareto progeny law.
    pub alpha: f64,
    /// Pareto index `β`, or the Weibull hazard index `r`; unused for the
    /// Gaussian and exponential laws, whose hazard indices are 2 and 1.
    pub beta_or_r: f64,
    pub displacement: Displacement,
    /// Weibull hazard constant `c` (`K(x) = c x^r`) or exponential rate.
    pub scale: f64,
    /// Generations; the number of i.i.d. terms for `lemma_heavy_sums`; the
    /// exponent in `a_n = 2^n` for `lemma_order_stats`; the summation depth
    /// for `lemma_regvar_sum`.
    pub n: u64,
    /// Order statistics kept per run, or recursion depth for the constants.
    pub k: usize,
    pub replicates: u64,
    /// Largest population simulated exactly.
    pub cap: u64,
    pub thresholds: Vec<f64>,
    pub master_seed: u64,
    /// Population size above which the stable surrogate takes over.
    pub surrogate_switch: f64,
    /// Order-statistic depth `δ` in `(0, 1]`.
    pub delta: f64,
    /// Geometric ratio `a` in `(0, 1)` for `lemma_regvar_sum`.
    pub ratio: f64,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Config keys in canonical order.
pub const KEYS: &[&str] = &[
    "experiment",
    "alpha",
    "beta_or_r",
    "displacement",
    "scale",
    "n",
    "k",
    "replicates",
    "cap",
    "thresholds",
    "master_seed",
    "surrogate_switch",
    "delta",
    "ratio",
    "threads",
    "output",
];

fn parse<T: FromStr>(field: &'static str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        field,
        value: value.to_owned(),
        reason: e.to_string(),
    })
}

fn parse_grid(value: &str) -> Result<Vec<f64>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|x| parse("thresholds", x)).collect()
}

fn domain(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Domain {
        field,
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    /// Defaults sized for the documented verification runs.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            alpha: 0.5,
            beta_or_r: 1.0,
            displacement: Displacement::Pareto,
            scale: 1.0,
            n: 25,
            k: 2,
            replicates: 1000,
            cap: 10_000_000,
            thresholds: brwx_core::brw::default_thresholds(),
            master_seed: 20_240_601,
            surrogate_switch: 1e6,
            delta: 0.5,
            ratio: 0.5,
            threads: None,
            output: None,
        };
        match experiment {
            Experiment::GwConvergence => {}
            Experiment::MassConcentration => c.replicates = 500,
            Experiment::HeavyPointProcess | Experiment::FrechetMax | Experiment::CloudSpeedHeavy => {
                c.alpha = 0.8;
                c.n = 4;
                c.replicates = 2200;
            }
            Experiment::LightTailRatio | Experiment::CloudSpeedLight => {
                c.alpha = 0.8;
                c.displacement = Displacement::Gaussian;
                c.beta_or_r = 2.0;
                c.n = 40;
                c.k = 1;
                c.replicates = 500;
            }
            Experiment::LemmaOrderStats => {
                c.displacement = Displacement::Exponential;
                c.n = 24;
                c.replicates = 50;
            }
            Experiment::LemmaHeavySums => {
                c.n = 1_000_000;
                c.replicates = 100;
            }
            Experiment::LemmaRegvarSum => {
                c.n = 200;
                c.replicates = 1;
            }
            Experiment::ConstantsTable => {
                c.beta_or_r = 2.0;
                c.k = 10;
                c.replicates = 1;
            }
        }
        c
    }

    /// Set one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "experiment" => self.experiment = parse("experiment", v)?,
            "alpha" => self.alpha = parse("alpha", v)?,
            "beta_or_r" => self.beta_or_r = parse("beta_or_r", v)?,
            "displacement" => self.displacement = parse("displacement", v)?,
            "scale" => self.scale = parse("scale", v)?,
            "n" => self.n = parse_count("n", v)?,
            "k" => self.k = parse("k", v)?,
            "replicates" => self.replicates = parse_count("replicates", v)?,
            "cap" => self.cap = parse_count("cap", v)?,
            "thresholds" => self.thresholds = parse_grid(v)?,
            "master_seed" => self.master_seed = parse("master_seed", v)?,
            "surrogate_switch" => self.surrogate_switch = parse("surrogate_switch", v)?,
            "delta" => self.delta = parse("delta", v)?,
            "ratio" => self.ratio = parse("ratio", v)?,
            "threads" => self.threads = Some(parse("threads", v)?),
            "output" => self.output = Some(PathBuf::from(v)),
            other => return Err(ConfigError::UnknownKey(other.to_owned())),
        }
        Ok(())
    }

    /// Every field as `key = value` lines in canonical order; unset optional
    /// fields are omitted. Parsing the result reproduces `self` exactly.
    pub fn to_kv(&self) -> String {
        self.kv_lines(true)
    }

    fn kv_lines(&self, with_execution: bool) -> String {
        let grid: Vec<String> = self.thresholds.iter().map(|x| x.to_string()).collect();
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("experiment", self.experiment.to_string());
        line("alpha", self.alpha.to_string());
        line("beta_or_r", self.beta_or_r.to_string());
        line("displacement", self.displacement.to_string());
        line("scale", self.scale.to_string());
        line("n", self.n.to_string());
        line("k", self.k.to_string());
        line("replicates", self.replicates.to_string());
        line("cap", self.cap.to_string());
        line("thresholds", grid.join(","));
        line("master_seed", self.master_seed.to_string());
        line("surrogate_switch", self.surrogate_switch.to_string());
        line("delta", self.delta.to_string());
        line("ratio", self.ratio.to_string());
        if with_execution {
            if let Some(t) = self.threads {
                line("threads", t.to_string());
            }
            if let Some(o) = &self.output {
                line("output", o.display().to_string());
            }
        }
        out
    }

    /// Parse `key = value` text on top of the defaults of the experiment it
    /// names (or `fallback` if it names none). `#` starts a comment.
    pub fn from_kv(text: &str, fallback: Option<Experiment>) -> Result<Self, ConfigError> {
        let pairs = parse_kv(text)?;
        let experiment = match pairs.iter().find(|(k, _)| k == "experiment") {
            Some((_, v)) => parse("experiment", v)?,
            None => fallback.ok_or(ConfigError::MissingExperiment)?,
        };
        let mut config = Self::defaults(experiment);
        for (k, v) in &pairs {
            config.set(k, v)?;
        }
        Ok(config)
    }

    /// SHA-256 of the canonical text without execution settings, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.kv_lines(false).as_bytes()))
    }

    pub fn progeny(&self) -> ProgenyLaw {
        ProgenyLaw::pareto_floor(self.alpha).expect("validated alpha")
    }

    pub fn displacement_law(&self) -> DisplacementLaw {
        match self.displacement {
            Displacement::Pareto => DisplacementLaw::Pareto { beta: self.beta_or_r },
            Displacement::Weibull => DisplacementLaw::Weibull {
                r: self.beta_or_r,
                c: self.scale,
            },
            Displacement::Gaussian => DisplacementLaw::Gaussian,
            Displacement::Exponential => DisplacementLaw::Exponential { rate: self.scale },
        }
    }

    /// `ln` of the surrogate switch size.
    pub fn switch_log_size(&self) -> f64 {
        self.surrogate_switch.ln()
    }

    /// Output directory: the configured one, else the environment's, else
    /// [`DEFAULT_OUT_DIR`].
    pub fn output_dir(&self) -> PathBuf {
        self.output
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn threads(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    /// Check every field against its domain, naming the first offender.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit_open = |x: f64| x > 0.0 && x < 1.0;
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !unit_open(self.alpha) {
            return Err(domain("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        if !positive(self.beta_or_r) {
            return Err(domain("beta_or_r", format!("{} must be positive", self.beta_or_r)));
        }
        if !positive(self.scale) {
            return Err(domain("scale", format!("{} must be positive", self.scale)));
        }
        if self.k < 1 {
            return Err(domain("k", "must be at least 1"));
        }
        if self.replicates < 1 {
            return Err(domain("replicates", "must be at least 1"));
        }
        if self.cap < 1 {
            return Err(domain("cap", "must be at least 1"));
        }
        if self.thresholds.iter().any(|&x| !positive(x)) || self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("thresholds", "must be positive and strictly increasing"));
        }
        let switch = self.switch_log_size();
        if !(MIN_SWITCH_LOG_SIZE - 1e-12..=MAX_SWITCH_LOG_SIZE + 1e-12).contains(&switch) {
            return Err(domain("surrogate_switch", format!("{} not in [1e4, 2^32]", self.surrogate_switch)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(domain("delta", format!("{} not in (0, 1]", self.delta)));
        }
        if !unit_open(self.ratio) {
            return Err(domain("ratio", format!("{} not in (0, 1)", self.ratio)));
        }
        if self.threads == Some(0) {
            return Err(domain("threads", "must be at least 1"));
        }
        match self.experiment {
            Experiment::LemmaHeavySums if self.n < 2 => return Err(domain("n", "needs at least 2 terms")),
            Experiment::LemmaOrderStats if !(1..=MAX_ORDER_STATS_EXPONENT).contains(&self.n) => {
                return Err(domain("n", format!("a_n = 2^n needs n in 1..={MAX_ORDER_STATS_EXPONENT}")))
            }
            _ if self.n < 1 => return Err(domain("n", "must be at least 1")),
            _ => {}
        }
        let law = self.displacement_law();
        if self.experiment.is_heavy_brw() && !law.is_regularly_varying() {
            return Err(domain("displacement", "heavy-tail experiments need pareto displacements"));
        }
        if self.experiment.is_light_brw() && law.is_regularly_varying() {
            return Err(domain("displacement", "light-tail experiments need a light-tailed law"));
        }
        Ok(())
    }

    /// Read a config file, with `fallback` naming the experiment if the
    /// file does not.
    pub fn from_file(path: &Path, fallback: Option<Experiment>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_kv(&text, fallback)
    }
}

fn parse_count(field: &'static str, v: &str) -> Result<u64, ConfigError> {
    // Accept scientific notation for counts such as `1e7`.
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(ConfigError::InvalidValue {
            field,
            value: v.to_owned(),
            reason: "expected a non-negative integer".into(),
        }),
    }
}

/// Split `key = value` lines, skipping blanks and `#` comments.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_owned()));
        }
        pairs.push((k.to_owned(), v.trim().to_owned()));
    }
    Ok(pairs)
}
