//! Empirical tail statistics and their theoretical companions.

use fullcorr_core::bounds::{theorem1_bound, theorem2_bound, BoundQuery, DeltaChoice};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::survey::TrialRecord;
use crate::tags::TAG_SETTINGS;
use crate::{Error, Result};

/// 97.5% standard normal quantile, for two-sided 95% Wilson intervals.
const WILSON_Z: f64 = 1.959963984540054;

/// One row of the tail table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub v: f64,
    /// Fraction of trials with `qnl_value > v`.
    pub empirical_fraction: f64,
    pub wilson_ci_low: f64,
    pub wilson_ci_high: f64,
    /// log10 of the applicable theorem bound at the best δ, when the
    /// threshold is feasible (`v` above the theorem's ceiling).
    pub theorem_bound_log10: Option<f64>,
    /// `min(1, bound)`; 1 when the bound is vacuous or infeasible.
    pub bound_clamped: f64,
}

/// Where the numbers came from: enough to re-run the survey bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub master_seed: u64,
    /// Seed of the per-survey settings draw (fixed mode).
    pub settings_seed: u64,
    /// The sampling measure on the measurement space is an artifact
    /// choice, not canonical; flagged here.
    pub settings_measure: String,
    /// Optimized values are see-saw outputs: lower bounds on the supremum.
    pub estimator: String,
}

/// Aggregated survey statistics plus the theory columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub config: ExperimentConfig,
    pub lambda: f64,
    pub trials: usize,
    pub empirical_mean: f64,
    /// Sample standard deviation (n-1 denominator; 0 for a single trial).
    pub empirical_std: f64,
    pub tail_table: Vec<TailRow>,
    pub provenance: Provenance,
}

/// Aggregates records into tail fractions over the configured `v` grid,
/// with Wilson 95% intervals and the theorem bound (auto δ, clamped at 1)
/// per grid point. Theorem 1 applies at `lambda = 0`, Theorem 2 otherwise.
pub fn empirical_tail(
    config: &ExperimentConfig,
    lambda: f64,
    records: &[TrialRecord],
) -> Result<SurveySummary> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let n = records.len();
    let mean = records.iter().map(|r| r.qnl_value).sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = records
            .iter()
            .map(|r| {
                let dev = r.qnl_value - mean;
                dev * dev
            })
            .sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };

    let mut grid = config.v_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tail_table = grid
        .into_iter()
        .map(|v| {
            let hits = records.iter().filter(|r| r.qnl_value > v).count();
            let fraction = hits as f64 / n as f64;
            let (lo, hi) = wilson_interval(hits, n);
            let bound_log10 = tail_bound_log10(config, lambda, v);
            let bound_clamped = match bound_log10 {
                Some(x) if x < 0.0 => 10f64.powf(x),
                _ => 1.0,
            };
            TailRow {
                v,
                empirical_fraction: fraction,
                wilson_ci_low: lo,
                wilson_ci_high: hi,
                theorem_bound_log10: bound_log10,
                bound_clamped,
            }
        })
        .collect();

    Ok(SurveySummary {
        config: config.clone(),
        lambda,
        trials: n,
        empirical_mean: mean,
        empirical_std: std,
        tail_table,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.master_seed,
            settings_seed: fullcorr_core::seeding::mix64(config.master_seed, TAG_SETTINGS),
            settings_measure: "gaussian-hermitian-msign".to_string(),
            estimator: "see-saw (lower bound on sup_Q)".to_string(),
        },
    })
}

/// The applicable theorem bound at threshold `v` with auto δ, or `None`
/// when `v` is below the theorem's ceiling (no feasible δ exists).
fn tail_bound_log10(config: &ExperimentConfig, lambda: f64, v: f64) -> Option<f64> {
    let query = BoundQuery {
        d: config.d,
        n_sites: config.n_sites,
        v,
        delta: DeltaChoice::Auto,
        lambda,
    };
    let report = if lambda > 0.0 {
        theorem2_bound(&query)
    } else {
        theorem1_bound(&query)
    };
    report.ok().map(|r| r.tail_bound_log10)
}

/// Wilson score interval for a binomial fraction at 95%.
fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
