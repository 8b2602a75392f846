//! Experiment configuration and the plain-text config file.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How each trial's violation value is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Evaluate `Q_NL` at settings drawn once per survey (non-dull).
    Fixed,
    /// Maximize `Q_NL` over settings by see-saw, per trial.
    Optimized,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fixed => "fixed",
            Mode::Optimized => "optimized",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fixed" => Ok(Mode::Fixed),
            "optimized" => Ok(Mode::Optimized),
            other => Err(format!("mode must be 'fixed' or 'optimized', got '{other}'")),
        }
    }
}

/// See-saw knobs carried by a survey; the per-trial seed is derived from
/// the trial seed, not stored here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeesawParams {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub improvement_tol: f64,
}

impl Default for SeesawParams {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_sweeps: 500,
            improvement_tol: 1e-10,
        }
    }
}

/// Full description of one survey; everything an identical re-run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n_sites: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub mode: Mode,
    /// Noise strengths for `noise_sweep`; plain surveys ignore this.
    #[serde(default)]
    pub noise_lambdas: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub seesaw: SeesawParams,
    pub output_path: String,
    pub workers: usize,
    /// Fill `wall_ms` with measured timings. Off by default: timing data
    /// is scheduling-dependent and breaks byte-identical reports.
    #[serde(default)]
    pub collect_timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config {
                reason: format!("d must be >= 2, got {}", self.d),
            });
        }
        if self.n_sites < 1 {
            return Err(Error::Config {
                reason: "n_sites must be >= 1".into(),
            });
        }
        if self.trials < 1 {
            return Err(Error::Config {
                reason: "trials must be >= 1".into(),
            });
        }
        if self.workers < 1 {
            return Err(Error::Config {
                reason: "workers must be >= 1".into(),
            });
        }
        if self.noise_lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::Config {
                reason: "noise lambdas must lie in [0, 1]".into(),
            });
        }
        if self.seesaw.restarts < 1 || self.seesaw.max_sweeps < 1 {
            return Err(Error::Config {
                reason: "see-saw restarts and max_sweeps must be >= 1".into(),
            });
        }
        if self.seesaw.improvement_tol <= 0.0 {
            return Err(Error::Config {
                reason: "see-saw improvement_tol must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Key/value pairs from a plain-text config file: one `key = value` per
/// line, `#` comments, keys named exactly like the CLI flags. Flags given
/// on the command line override file values.
pub fn read_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("expected 'key = value', got '{raw}'"),
            });
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("unknown key '{key}'"),
            });
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// Keys accepted in config files; they mirror the CLI flag names.
pub const KNOWN_KEYS: &[&str] = &[
    "d",
    "n",
    "trials",
    "seed",
    "mode",
    "restarts",
    "max-sweeps",
    "tol",
    "v-grid",
    "out",
    "workers",
    "format",
    "lambdas",
];
