//! Command-line frontend for the Bell-violation laboratory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use fullcorr_core::bounds::{
    net_params, theorem1_bound, theorem2_bound, BoundQuery, DeltaChoice,
};
use fullcorr_core::optimize::{mermin_reference, seesaw_maximize, SeesawConfig};
use fullcorr_core::qcore::{ghz_state, read_state};
use fullcorr_harness::{
    emit_report, empirical_tail, noise_sweep, run_survey, ExperimentConfig, Mode, ReportFormat,
    SeesawParams,
};

#[derive(Parser)]
#[command(
    name = "fullcorr",
    about = "Monte Carlo surveys, see-saw optimization, and closed-form bounds \
             for full-correlation Bell inequalities on random multiqudit states",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Haar-random states and record their Bell violations.
    Survey(SurveyArgs),
    /// Repeat a survey at several local-noise strengths (qubits only).
    NoiseSweep(NoiseSweepArgs),
    /// Evaluate a concentration tail bound.
    Bounds(BoundsArgs),
    /// Evaluate the measurement-space net parameters.
    Net(NetArgs),
    /// GHZ reference value and direct cross-check.
    Ghz(GhzArgs),
    /// See-saw optimize the violation of a state loaded from a file.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct SurveyArgs {
    /// Local dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Number of sites.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// fixed | optimized
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated violation thresholds, e.g. 1.0,1.2,1.4.
    #[arg(long)]
    v_grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// csv | json
    #[arg(long)]
    format: Option<ReportFormat>,
    /// Plain-text `key = value` file mirroring these flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseSweepArgs {
    #[command(flatten)]
    survey: SurveyArgs,
    /// Comma-separated noise strengths, e.g. 0,0.05,0.1.
    #[arg(long)]
    lambdas: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    /// 1 (noiseless) or 2 (noisy qubits).
    #[arg(long)]
    theorem: u8,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    v: f64,
    /// A positive float, or "auto" to minimize over the slack.
    #[arg(long, default_value = "auto")]
    delta: String,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
}

#[derive(Args)]
struct NetArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
}

#[derive(Args)]
struct GhzArgs {
    #[arg(long)]
    n: usize,
    /// Amplitude of |0...0> (real); defaults to 1/sqrt(2).
    #[arg(long)]
    alpha: Option<f64>,
    /// Amplitude of |1...1> (real); defaults to 1/sqrt(2).
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// JSON state file (see the state format in the README).
    #[arg(long)]
    state_file: PathBuf,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Survey(args) => cmd_survey(args),
        Command::NoiseSweep(args) => cmd_noise_sweep(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Net(args) => cmd_net(args),
        Command::Ghz(args) => cmd_ghz(args),
        Command::Optimize(args) => cmd_optimize(args),
    }
}

fn cmd_survey(args: SurveyArgs) -> anyhow::Result<()> {
    let (config, format) = resolve_survey(&args, None)?;
    let records = run_survey(&config)?;
    let summary = empirical_tail(&config, 0.0, &records)?;
    let out = PathBuf::from(&config.output_path);
    emit_report(&summary, &records, format, &out)?;
    eprintln!(
        "survey: {} trials at d={}, n={}, mode={}; mean {:.6}, std {:.6} -> {}",
        summary.trials,
        config.d,
        config.n_sites,
        config.mode.as_str(),
        summary.empirical_mean,
        summary.empirical_std,
        out.display()
    );
    Ok(())
}

fn cmd_noise_sweep(args: NoiseSweepArgs) -> anyhow::Result<()> {
    let file_map = read_file_map(&args.survey)?;
    let lambdas_text = args
        .lambdas
        .or_else(|| file_map.get("lambdas").cloned())
        .context("--lambdas is required for noise-sweep")?;
    let lambdas = parse_f64_list(&lambdas_text).context("parsing --lambdas")?;
    let (mut config, format) = resolve_survey(&args.survey, Some(file_map))?;
    config.noise_lambdas = lambdas;

    let surveys = noise_sweep(&config)?;
    let base = PathBuf::from(&config.output_path);
    for survey in &surveys {
        let out = lambda_path(&base, survey.lambda);
        emit_report(&survey.summary, &survey.records, format, &out)?;
        eprintln!(
            "noise-sweep: lambda={}, mean {:.6}, std {:.6} -> {}",
            survey.lambda,
            survey.summary.empirical_mean,
            survey.summary.empirical_std,
            out.display()
        );
    }
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> anyhow::Result<()> {
    let delta = if args.delta == "auto" {
        DeltaChoice::Auto
    } else {
        DeltaChoice::Explicit(
            args.delta
                .parse()
                .with_context(|| format!("--delta must be a float or 'auto', got '{}'", args.delta))?,
        )
    };
    let query = BoundQuery {
        d: args.d,
        n_sites: args.n,
        v: args.v,
        delta,
        lambda: args.lambda,
    };
    let report = match args.theorem {
        1 => theorem1_bound(&query)?,
        2 => theorem2_bound(&query)?,
        other => bail!("--theorem must be 1 or 2, got {other}"),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_net(args: NetArgs) -> anyhow::Result<()> {
    let net = net_params(args.d, args.n, args.delta)?;
    println!("{}", serde_json::to_string_pretty(&net)?);
    Ok(())
}

fn cmd_ghz(args: GhzArgs) -> anyhow::Result<()> {
    let alpha = args.alpha.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
    let beta = args.beta.unwrap_or(std::f64::consts::FRAC_1_SQRT_2);
    let (settings, closed_form) = mermin_reference(args.n)?;
    let psi = ghz_state(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0), args.n)?;
    let qnl = fullcorr_core::belleval::qnl(&psi, &settings)?;
    let doc = serde_json::json!({
        "n_sites": args.n,
        "alpha": alpha,
        "beta": beta,
        "balanced_closed_form": closed_form,
        "qnl": qnl,
        "abs_diff": (closed_form - qnl).abs(),
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs) -> anyhow::Result<()> {
    let state = read_state(&args.state_file)?;
    let config = SeesawConfig {
        restarts: args.restarts,
        max_sweeps: args.max_sweeps,
        improvement_tol: args.tol,
        seed: args.seed,
    };
    let result = seesaw_maximize(&state, &config)?;
    let doc = serde_json::json!({
        "value": result.value,
        "sweeps_used": result.sweeps_used,
        "restarts_used": result.restarts_used,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

/// Loads the config file named by the flags, if any.
fn read_file_map(args: &SurveyArgs) -> anyhow::Result<HashMap<String, String>> {
    Ok(match &args.config {
        Some(path) => fullcorr_harness::config::read_config_file(path)?,
        None => HashMap::new(),
    })
}

/// Merges CLI flags over config-file values into a validated config.
fn resolve_survey(
    args: &SurveyArgs,
    file_map: Option<HashMap<String, String>>,
) -> anyhow::Result<(ExperimentConfig, ReportFormat)> {
    let file = match file_map {
        Some(map) => map,
        None => read_file_map(args)?,
    };
    fn merged<T: Clone + FromStr>(
        flag: &Option<T>,
        file: &HashMap<String, String>,
        key: &str,
    ) -> anyhow::Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(value) = flag {
            return Ok(Some(value.clone()));
        }
        match file.get(key) {
            Some(text) => text
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key '{key}': {e}")),
            None => Ok(None),
        }
    }
    fn required<T>(value: Option<T>, key: &str) -> anyhow::Result<T> {
        value.with_context(|| format!("--{key} is required (flag or config file)"))
    }

    let defaults = SeesawParams::default();
    let v_grid_text = required(merged(&args.v_grid, &file, "v-grid")?, "v-grid")?;
    let out: PathBuf = required(merged(&args.out, &file, "out")?, "out")?;
    let config = ExperimentConfig {
        d: required(merged(&args.d, &file, "d")?, "d")?,
        n_sites: required(merged(&args.n, &file, "n")?, "n")?,
        trials: required(merged(&args.trials, &file, "trials")?, "trials")?,
        master_seed: required(merged(&args.seed, &file, "seed")?, "seed")?,
        mode: required(merged(&args.mode, &file, "mode")?, "mode")?,
        noise_lambdas: vec![],
        v_grid: parse_f64_list(&v_grid_text).context("parsing --v-grid")?,
        seesaw: SeesawParams {
            restarts: merged(&args.restarts, &file, "restarts")?.unwrap_or(defaults.restarts),
            max_sweeps: merged(&args.max_sweeps, &file, "max-sweeps")?
                .unwrap_or(defaults.max_sweeps),
            improvement_tol: merged(&args.tol, &file, "tol")?
                .unwrap_or(defaults.improvement_tol),
        },
        output_path: out.to_string_lossy().into_owned(),
        workers: merged(&args.workers, &file, "workers")?.unwrap_or(1),
        collect_timing: false,
    };
    config.validate()?;
    let format = merged(&args.format, &file, "format")?.unwrap_or(ReportFormat::Csv);
    Ok((config, format))
}

fn parse_f64_list(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad float '{s}'"))
        })
        .collect()
}

/// `results.csv` at lambda 0.05 becomes `results_lambda0.05.csv`.
fn lambda_path(base: &Path, lambda: f64) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|s| format!(".{}", s.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_lambda{lambda}{ext}"))
}
