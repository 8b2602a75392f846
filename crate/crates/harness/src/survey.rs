//! Trial execution: one Haar state per trial, one violation value per
//! trial, deterministic for any worker count.

use fullcorr_core::belleval::{qnl_noisy, qnl_with_table, NoiseLevel};
use fullcorr_core::optimize::{seesaw_maximize, seesaw_maximize_noisy, SeesawConfig};
use fullcorr_core::qcore::{haar_state, sample_settings, BOperatorTable, MeasurementSettings};
use fullcorr_core::seeding::mix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Mode};
use crate::tags::{TAG_OPTIMIZER, TAG_SETTINGS, TAG_STATE};
use crate::tail::{empirical_tail, SurveySummary};
use crate::{Error, Result};

/// One Monte Carlo trial's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub trial_seed: u64,
    pub d: usize,
    pub n_sites: usize,
    pub lambda: f64,
    pub mode: Mode,
    pub qnl_value: f64,
    pub sweeps_used: u32,
    pub restarts_used: u32,
    /// Measured per-trial wall time, or 0 unless `collect_timing` is set
    /// (timing data is not reproducible across runs).
    pub wall_ms: u64,
}

/// The per-survey fixed settings draw (non-dull, from the master seed).
pub fn survey_settings(config: &ExperimentConfig) -> Result<MeasurementSettings> {
    Ok(sample_settings(
        config.d,
        config.n_sites,
        mix64(config.master_seed, TAG_SETTINGS),
        true,
    )?)
}

/// Runs the noiseless survey described by `config`.
///
/// Trial `i` draws its state from `mix64(mix64(master_seed, i), TAG_STATE)`
/// and, in optimized mode, seeds its see-saw restarts from
/// `mix64(mix64(master_seed, i), TAG_OPTIMIZER)`. Records come back sorted
/// by `trial_id` and are identical for every worker count.
pub fn run_survey(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    run_survey_at(config, 0.0)
}

/// One noise level of a survey; `lambda = 0` is exactly [`run_survey`].
pub fn run_survey_at(config: &ExperimentConfig, lambda: f64) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let noise = NoiseLevel::new(lambda).map_err(Error::Core)?;
    let fixed = match config.mode {
        Mode::Fixed => Some(survey_settings(config)?),
        Mode::Optimized => None,
    };
    let fixed_table = fixed.as_ref().map(|settings| {
        let table = BOperatorTable::from_settings(settings);
        if lambda > 0.0 {
            fullcorr_core::belleval::dual_channel_table(&table, noise)
        } else {
            table
        }
    });

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config {
            reason: format!("cannot build worker pool: {e}"),
        })?;
    pool.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|trial_id| run_trial(config, noise, fixed_table.as_ref(), trial_id))
            .collect::<Result<Vec<_>>>()
    })
}

fn run_trial(
    config: &ExperimentConfig,
    noise: NoiseLevel,
    fixed_table: Option<&BOperatorTable>,
    trial_id: u64,
) -> Result<TrialRecord> {
    let started = std::time::Instant::now();
    let trial_seed = mix64(config.master_seed, trial_id);
    let state = haar_state(config.d, config.n_sites, mix64(trial_seed, TAG_STATE))?;
    let (qnl_value, sweeps_used, restarts_used) = match config.mode {
        Mode::Fixed => {
            let table = fixed_table.expect("fixed mode carries a table");
            (qnl_with_table(&state, table)?, 0, 0)
        }
        Mode::Optimized => {
            let seesaw = SeesawConfig {
                restarts: config.seesaw.restarts,
                max_sweeps: config.seesaw.max_sweeps,
                improvement_tol: config.seesaw.improvement_tol,
                seed: mix64(trial_seed, TAG_OPTIMIZER),
            };
            let result = if noise.value() > 0.0 {
                seesaw_maximize_noisy(&state, &seesaw, noise)?
            } else {
                seesaw_maximize(&state, &seesaw)?
            };
            (
                result.value,
                result.sweeps_used as u32,
                result.restarts_used as u32,
            )
        }
    };
    let wall_ms = if config.collect_timing {
        started.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(TrialRecord {
        trial_id,
        trial_seed,
        d: config.d,
        n_sites: config.n_sites,
        lambda: noise.value(),
        mode: config.mode,
        qnl_value,
        sweeps_used,
        restarts_used,
        wall_ms,
    })
}

/// A survey repeated at one noise strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSurvey {
    pub lambda: f64,
    pub records: Vec<TrialRecord>,
    pub summary: SurveySummary,
}

/// Repeats the survey at each configured noise strength (qubits only).
/// The `lambda = 0` entry reproduces the noiseless survey exactly, seeds
/// included.
pub fn noise_sweep(config: &ExperimentConfig) -> Result<Vec<LambdaSurvey>> {
    config.validate()?;
    if config.d != 2 {
        return Err(Error::Config {
            reason: format!("noise sweeps require qubits (d = 2), got d = {}", config.d),
        });
    }
    if config.noise_lambdas.is_empty() {
        return Err(Error::Config {
            reason: "noise sweep needs at least one lambda".into(),
        });
    }
    config
        .noise_lambdas
        .iter()
        .map(|&lambda| {
            let records = run_survey_at(config, lambda)?;
            let summary = empirical_tail(config, lambda, &records)?;
            Ok(LambdaSurvey {
                lambda,
                records,
                summary,
            })
        })
        .collect()
}

/// Evaluates `qnl_noisy` for the GHZ control row used in noise reports.
pub fn ghz_control_value(n_sites: usize, lambda: f64) -> Result<f64> {
    let (settings, _) = fullcorr_core::optimize::mermin_reference(n_sites)?;
    let psi = fullcorr_core::qcore::balanced_ghz(n_sites)?;
    Ok(qnl_noisy(&psi, &settings, NoiseLevel::new(lambda)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SeesawParams;

    fn tiny_config(mode: Mode, workers: usize) -> ExperimentConfig {
        ExperimentConfig {
            d: 2,
            n_sites: 2,
            trials: 6,
            master_seed: 99,
            mode,
            noise_lambdas: vec![],
            v_grid: vec![1.0, 1.2, 1.5],
            seesaw: SeesawParams {
                restarts: 3,
                max_sweeps: 60,
                improvement_tol: 1e-9,
            },
            output_path: "unused".into(),
            workers,
            collect_timing: false,
        }
    }

    #[test]
    fn records_are_sorted_and_worker_independent() {
        let one = run_survey(&tiny_config(Mode::Optimized, 1)).unwrap();
        let four = run_survey(&tiny_config(Mode::Optimized, 4)).unwrap();
        assert_eq!(one, four);
        assert!(one.windows(2).all(|w| w[0].trial_id < w[1].trial_id));
    }

    #[test]
    fn optimized_two_qubit_values_respect_tsirelson() {
        let records = run_survey(&tiny_config(Mode::Optimized, 2)).unwrap();
        for r in records {
            assert!(r.qnl_value <= std::f64::consts::SQRT_2 + 1e-6);
            assert!(r.qnl_value >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn fixed_mode_uses_one_nondull_draw() {
        let config = tiny_config(Mode::Fixed, 1);
        let settings = survey_settings(&config).unwrap();
        assert!(settings.is_nondull());
        let records = run_survey(&config).unwrap();
        assert_eq!(records.len(), 6);
        assert!(records.iter().all(|r| r.sweeps_used == 0));
    }

    #[test]
    fn zero_lambda_sweep_matches_noiseless_survey() {
        let mut config = tiny_config(Mode::Optimized, 1);
        config.noise_lambdas = vec![0.0, 0.4];
        let sweep = noise_sweep(&config).unwrap();
        let plain = run_survey(&config).unwrap();
        assert_eq!(sweep[0].records, plain);
        // Noise can only shrink the optimized violation.
        for (noisy, clean) in sweep[1].records.iter().zip(&plain) {
            assert!(noisy.qnl_value <= clean.qnl_value + 1e-9);
        }
    }

    #[test]
    fn ghz_control_row() {
        let value = ghz_control_value(3, 0.5).unwrap();
        assert!((value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fixed_mode_noisy_means_stay_classical() {
        // E[Q_NL^lambda] <= 1 for fixed settings at every noise level.
        let mut config = tiny_config(Mode::Fixed, 1);
        config.n_sites = 4;
        config.trials = 4000;
        config.master_seed = 0x5EED;
        for lambda in [0.0, 0.2, 0.6, 1.0] {
            let records = run_survey_at(&config, lambda).unwrap();
            let n = records.len() as f64;
            let mean = records.iter().map(|r| r.qnl_value).sum::<f64>() / n;
            let var = records
                .iter()
                .map(|r| (r.qnl_value - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            let se = (var / n).sqrt();
            assert!(
                mean <= 1.0 + 3.0 * se,
                "lambda={lambda}: mean {mean} above 1 + 3 SE"
            );
        }
    }
}
