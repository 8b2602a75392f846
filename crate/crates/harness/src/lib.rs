//! Monte Carlo experiment driver: sample Haar-random states, evaluate or
//! optimize their Bell violations, aggregate empirical tail statistics,
//! attach the theoretical bounds, and emit reproducible CSV/JSON reports.
//!
//! Determinism contract: every record is a pure function of the
//! experiment configuration (including the master seed). Trials derive
//! their seeds by mixing, never by sharing a sequential stream, so output
//! is byte-identical for any worker count.

pub mod config;
pub mod report;
pub mod survey;
pub mod tail;

pub use config::{ExperimentConfig, Mode, SeesawParams};
pub use report::{emit_report, read_records_csv, read_report_json, ReportFormat};
pub use survey::{noise_sweep, run_survey, LambdaSurvey, TrialRecord};
pub use tail::{empirical_tail, Provenance, SurveySummary, TailRow};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fullcorr_core::Error),

    #[error("invalid experiment config: {reason}")]
    Config { reason: String },

    #[error("no records to aggregate")]
    EmptyRecords,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: line {line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Stream tags for seed derivation (see `fullcorr_core::seeding`).
///
/// * `TAG_SETTINGS` — the per-survey fixed settings draw; the ASCII bytes
///   of `"settings"` read big-endian.
/// * `TAG_STATE` / `TAG_OPTIMIZER` — per-trial sub-streams for the Haar
///   state and the see-saw restarts.
pub mod tags {
    pub const TAG_SETTINGS: u64 = 0x7365_7474_696e_6773;
    pub const TAG_STATE: u64 = 1;
    pub const TAG_OPTIMIZER: u64 = 2;
}
