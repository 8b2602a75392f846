//! See-saw maximization of the Bell functional over measurement settings,
//! plus independent closed-form references.
//!
//! The supremum over settings has no closed form in general. The see-saw
//! estimator alternates two exact half-steps: (a) set the sign function to
//! the pointwise sign of the current expectations, (b) for each site,
//! replace its observable pair by the matrix signs of the effective
//! operators, which maximizes the linearized objective over Hermitian
//! involutions. Both half-steps are exact maximizations, so the objective
//! never decreases; the result is a lower bound on the true supremum.

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;

use crate::belleval::{depolarize_observable, NoiseLevel, SignFunction};
use crate::qcore::{
    apply_site_op, b_operator, expectation_table, inner_product, sample_settings, site_stride,
    BOperatorTable, DichotomicPair, MeasurementSettings, ObservableMatrix, PureState,
};
use crate::seeding::mix64;
use crate::{Error, Result};

/// Knobs for the see-saw estimator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SeesawConfig {
    /// Independent random restarts; the best outcome is reported.
    pub restarts: usize,
    /// Hard cap on sweeps per restart.
    pub max_sweeps: usize,
    /// A restart stops once a full sweep improves the objective by less
    /// than this.
    pub improvement_tol: f64,
    /// Seed for the restart initializations (restart `r` draws its
    /// settings from `mix64(seed, r)`).
    pub seed: u64,
}

impl SeesawConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            restarts: 20,
            max_sweeps: 500,
            improvement_tol: 1e-10,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidConfig {
                reason: "restarts must be >= 1".into(),
            });
        }
        if self.max_sweeps < 1 {
            return Err(Error::InvalidConfig {
                reason: "max_sweeps must be >= 1".into(),
            });
        }
        if self.improvement_tol <= 0.0 {
            return Err(Error::NonPositive {
                name: "improvement_tol",
                value: self.improvement_tol,
            });
        }
        Ok(())
    }
}

/// Outcome of a see-saw run.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    /// Best objective value found (a lower bound on the supremum).
    pub value: f64,
    /// The settings achieving `value`.
    pub settings: MeasurementSettings,
    /// Sweeps used by the best restart.
    pub sweeps_used: usize,
    /// Restarts executed.
    pub restarts_used: usize,
    /// Objective after each sweep of the best restart (element 0 is the
    /// value at initialization).
    pub trajectory: Vec<f64>,
}

/// Hermiticity slack accepted by [`msign`]; effective operators are
/// Hermitized sums, so anything beyond rounding noise is a caller bug.
const MSIGN_INPUT_TOL: f64 = 1e-9;

/// The matrix sign of a Hermitian matrix: eigenvalues replaced by their
/// signs, with `sign(0) = +1`.
///
/// The result is the Hermitian involution maximizing `Tr(A h)`, with
/// optimum equal to the trace norm of `h`.
pub fn msign(h: &DMatrix<Complex64>) -> Result<ObservableMatrix> {
    if h.nrows() != h.ncols() || h.is_empty() {
        return Err(Error::ShapeMismatch {
            context: format!("msign needs a square matrix, got {}x{}", h.nrows(), h.ncols()),
        });
    }
    let dev = crate::qcore::hermitian_deviation(h);
    if dev > MSIGN_INPUT_TOL {
        return Err(Error::NotHermitian { max_dev: dev });
    }
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let d = h.nrows();
    let v = eig.eigenvectors;
    let mut signed = DMatrix::<Complex64>::zeros(d, d);
    for (col, mu) in eig.eigenvalues.iter().enumerate() {
        let s = if *mu < 0.0 { -1.0 } else { 1.0 };
        for row in 0..d {
            signed[(row, col)] = v[(row, col)] * Complex64::new(s, 0.0);
        }
    }
    let m = signed * v.adjoint();
    Ok(ObservableMatrix::from_hermitian_unchecked(hermitize(&m)))
}

fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).scale(0.5)
}

/// The unique Hermitian `(G_0, G_1)` such that replacing site `site`'s
/// pair by any `(A_0, A_1)` gives
/// `linear_value = Tr(A_0 G_0) + Tr(A_1 G_1)`.
pub fn effective_operators(
    state: &PureState,
    settings: &MeasurementSettings,
    site: usize,
    s: &SignFunction,
) -> Result<(ObservableMatrix, ObservableMatrix)> {
    let table = BOperatorTable::from_settings(settings);
    let (g0, g1) = effective_operators_table(state, &table, site, s)?;
    Ok((
        ObservableMatrix::from_hermitian_unchecked(g0),
        ObservableMatrix::from_hermitian_unchecked(g1),
    ))
}

/// [`effective_operators`] against a prebuilt (possibly noise-modified)
/// table for the other sites. Returned matrices are Hermitized raw sums.
pub(crate) fn effective_operators_table(
    state: &PureState,
    table: &BOperatorTable,
    site: usize,
    s: &SignFunction,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = table.n_sites();
    if site >= n {
        return Err(Error::SiteIndex { site, n_sites: n });
    }
    if state.d() != table.d() || state.n_sites() != n {
        return Err(Error::ShapeMismatch {
            context: "state and settings shapes differ".into(),
        });
    }
    if s.n_sites() != n {
        return Err(Error::ShapeMismatch {
            context: format!("sign function has {} sites, settings have {n}", s.n_sites()),
        });
    }
    let d = state.d();
    let mut g0 = vec![Complex64::ZERO; d * d];
    let mut g1 = vec![Complex64::ZERO; d * d];
    let mut scratch = vec![Complex64::ZERO; d * d];
    let mut buffers: Vec<Vec<Complex64>> = (0..n.saturating_sub(1))
        .map(|_| vec![Complex64::ZERO; state.dim()])
        .collect();
    effective_descend(
        state,
        table,
        site,
        s,
        0,
        0,
        state.amplitudes(),
        &mut buffers,
        &mut scratch,
        &mut g0,
        &mut g1,
    );
    // Row-major flat accumulators back into matrices, Hermitized.
    let as_matrix = |flat: &[Complex64]| DMatrix::from_fn(d, d, |r, c| flat[r * d + c]);
    Ok((hermitize(&as_matrix(&g0)), hermitize(&as_matrix(&g1))))
}

#[allow(clippy::too_many_arguments)]
fn effective_descend(
    state: &PureState,
    table: &BOperatorTable,
    site_t: usize,
    s: &SignFunction,
    site: usize,
    acc: usize,
    prev: &[Complex64],
    buffers: &mut [Vec<Complex64>],
    scratch: &mut [Complex64],
    g0: &mut [Complex64],
    g1: &mut [Complex64],
) {
    let n = table.n_sites();
    let d = state.d();
    if site == n {
        let s0 = s.sign(acc);
        let s1 = s.sign(acc | (1 << (n - 1 - site_t)));
        let c0 = 0.5 * (s0 + s1);
        let c1 = 0.5 * (s0 - s1);
        partial_matrix(
            prev,
            state.amplitudes(),
            d,
            site_stride(d, n, site_t),
            scratch,
        );
        if c0 != 0.0 {
            for (g, k) in g0.iter_mut().zip(scratch.iter()) {
                *g += *k * c0;
            }
        }
        if c1 != 0.0 {
            for (g, k) in g1.iter_mut().zip(scratch.iter()) {
                *g += *k * c1;
            }
        }
        return;
    }
    if site == site_t {
        effective_descend(
            state, table, site_t, s, site + 1, acc, prev, buffers, scratch, g0, g1,
        );
        return;
    }
    let stride = site_stride(d, n, site);
    let (cur, rest) = buffers.split_first_mut().expect("buffer per applied site");
    for x in 0..2u8 {
        apply_site_op(cur, prev, table.op(site, x), d, stride);
        effective_descend(
            state,
            table,
            site_t,
            s,
            site + 1,
            acc | ((x as usize) << (n - 1 - site)),
            cur,
            rest,
            scratch,
            g0,
            g1,
        );
    }
}

/// Fills `out` (row major, `d x d`) with the `K` satisfying
/// `Tr(A K) = <w| A_(site) |psi>` for any operator `A` applied at the site
/// with the given stride.
fn partial_matrix(
    w: &[Complex64],
    psi: &[Complex64],
    d: usize,
    stride: usize,
    out: &mut [Complex64],
) {
    out.fill(Complex64::ZERO);
    let block = d * stride;
    if d == 2 {
        let (mut k00, mut k01, mut k10, mut k11) =
            (Complex64::ZERO, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO);
        for (wb, pb) in w.chunks_exact(block).zip(psi.chunks_exact(block)) {
            let (w0, w1) = wb.split_at(stride);
            let (p0, p1) = pb.split_at(stride);
            for l in 0..stride {
                let (w0c, w1c) = (w0[l].conj(), w1[l].conj());
                // K[b, a] += conj(w[a]) psi[b]
                k00 += w0c * p0[l];
                k10 += w0c * p1[l];
                k01 += w1c * p0[l];
                k11 += w1c * p1[l];
            }
        }
        out[0] = k00;
        out[1] = k01;
        out[2] = k10;
        out[3] = k11;
        return;
    }
    for base in (0..psi.len()).step_by(block) {
        for a in 0..d {
            let wa = &w[base + a * stride..base + a * stride + stride];
            for b in 0..d {
                let pb = &psi[base + b * stride..base + b * stride + stride];
                let mut acc = Complex64::ZERO;
                for (x, y) in wa.iter().zip(pb) {
                    acc += x.conj() * y;
                }
                out[b * d + a] += acc;
            }
        }
    }
}

/// Maximizes `Q_NL` over measurement settings by see-saw with random
/// restarts. The result is a lower bound on the supremum.
pub fn seesaw_maximize(state: &PureState, config: &SeesawConfig) -> Result<OptimizationResult> {
    seesaw_core(state, config, None)
}

/// See-saw against the noisy functional `Q_NL^lambda` (qubits only). The
/// channel is self-adjoint, so it is folded into the effective operators
/// and both half-steps stay exact.
pub fn seesaw_maximize_noisy(
    state: &PureState,
    config: &SeesawConfig,
    noise: NoiseLevel,
) -> Result<OptimizationResult> {
    if state.d() != 2 {
        return Err(Error::NoiseRequiresQubits { d: state.d() });
    }
    if noise.value() == 0.0 {
        return seesaw_core(state, config, None);
    }
    seesaw_core(state, config, Some(noise))
}

fn seesaw_core(
    state: &PureState,
    config: &SeesawConfig,
    noise: Option<NoiseLevel>,
) -> Result<OptimizationResult> {
    config.validate()?;
    let mut best: Option<RestartOutcome> = None;
    for restart in 0..config.restarts {
        let seed = mix64(config.seed, restart as u64);
        let settings = sample_settings(state.d(), state.n_sites(), seed, false)?;
        let outcome = run_restart(state, settings, config, noise)?;
        if best.as_ref().is_none_or(|b| outcome.value > b.value) {
            best = Some(outcome);
        }
    }
    let b = best.expect("restarts >= 1");
    Ok(OptimizationResult {
        value: b.value,
        settings: b.settings,
        sweeps_used: b.sweeps,
        restarts_used: config.restarts,
        trajectory: b.trajectory,
    })
}

struct RestartOutcome {
    value: f64,
    settings: MeasurementSettings,
    sweeps: usize,
    trajectory: Vec<f64>,
}

fn run_restart(
    state: &PureState,
    mut settings: MeasurementSettings,
    config: &SeesawConfig,
    noise: Option<NoiseLevel>,
) -> Result<RestartOutcome> {
    let n = settings.n_sites();
    let mut table = noisy_table(&settings, noise);
    let mut expectations = expectation_table(state, &table)?;
    let mut value: f64 = expectations.iter().map(|e| e.abs()).sum();
    let mut trajectory = vec![value];
    let mut sweeps = 0;
    for _ in 0..config.max_sweeps {
        sweeps += 1;
        let s = SignFunction::from_expectations(&expectations)?;
        for site in 0..n {
            let (g0, g1) = effective_operators_table(state, &table, site, &s)?;
            // Site t's half of the channel moves onto the effective
            // operators (the depolarizing adjoint is self-adjoint).
            let (g0, g1) = match noise {
                Some(nl) => (
                    depolarize_observable(&g0, nl.value()),
                    depolarize_observable(&g1, nl.value()),
                ),
                None => (g0, g1),
            };
            let pair = DichotomicPair::new(msign(&g0)?, msign(&g1)?)?;
            for x in 0..2u8 {
                let b = b_operator(&pair, x).entries().clone();
                let b = match noise {
                    Some(nl) => depolarize_observable(&b, nl.value()),
                    None => b,
                };
                table.set_op(site, x, b);
            }
            settings.replace_pair(site, pair)?;
        }
        expectations = expectation_table(state, &table)?;
        let new_value: f64 = expectations.iter().map(|e| e.abs()).sum();
        trajectory.push(new_value);
        let improvement = new_value - value;
        value = new_value;
        if improvement < config.improvement_tol {
            break;
        }
    }
    Ok(RestartOutcome {
        value,
        settings,
        sweeps,
        trajectory,
    })
}

fn noisy_table(settings: &MeasurementSettings, noise: Option<NoiseLevel>) -> BOperatorTable {
    let table = BOperatorTable::from_settings(settings);
    match noise {
        Some(nl) => crate::belleval::dual_channel_table(&table, nl),
        None => table,
    }
}

/// Closed-form two-qubit maximum of `Q_NL`: `sqrt(s1^2 + s2^2)` from the
/// two largest singular values of the correlation matrix
/// `T_ab = <psi| sigma_a (x) sigma_b |psi>`.
pub fn horodecki_chsh(state: &PureState) -> Result<f64> {
    if state.d() != 2 || state.n_sites() != 2 {
        return Err(Error::ShapeMismatch {
            context: format!(
                "Horodecki criterion needs two qubits, got d={}, n={}",
                state.d(),
                state.n_sites()
            ),
        });
    }
    let paulis = [
        ObservableMatrix::pauli_x(),
        ObservableMatrix::pauli_y(),
        ObservableMatrix::pauli_z(),
    ];
    let psi = state.amplitudes();
    let mut t = Matrix3::<f64>::zeros();
    let mut va = vec![Complex64::ZERO; 4];
    let mut vab = vec![Complex64::ZERO; 4];
    for (a, pa) in paulis.iter().enumerate() {
        apply_site_op(&mut va, psi, pa.entries(), 2, 2);
        for (b, pb) in paulis.iter().enumerate() {
            apply_site_op(&mut vab, &va, pb.entries(), 2, 1);
            t[(a, b)] = inner_product(psi, &vab).re;
        }
    }
    let mut singular: Vec<f64> = t.svd(false, false).singular_values.iter().copied().collect();
    singular.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok((singular[0] * singular[0] + singular[1] * singular[1]).sqrt())
}

/// The Pauli-x / Pauli-y reference settings and the closed-form value of
/// `Q_NL` on the balanced GHZ state:
/// `2^(-N/2) sum_k C(N,k) |cos((N-2k) pi/4)|`, which equals `2^((N-1)/2)`
/// for odd `N`.
pub fn mermin_reference(n_sites: usize) -> Result<(MeasurementSettings, f64)> {
    if n_sites < 2 {
        return Err(Error::ShapeMismatch {
            context: format!("reference workload needs n_sites >= 2, got {n_sites}"),
        });
    }
    let pairs = (0..n_sites)
        .map(|_| DichotomicPair::new(ObservableMatrix::pauli_x(), ObservableMatrix::pauli_y()))
        .collect::<Result<Vec<_>>>()?;
    let settings = MeasurementSettings::new(pairs)?;

    // |cos(r pi/4)| depends only on r mod 8 and takes exact values.
    let mut sum = 0.0f64;
    let mut binom = 1.0f64;
    for k in 0..=n_sites {
        let r = (n_sites as i64 - 2 * k as i64).rem_euclid(8);
        let cos_abs = match r {
            0 | 4 => 1.0,
            2 | 6 => 0.0,
            _ => std::f64::consts::FRAC_1_SQRT_2,
        };
        sum += binom * cos_abs;
        binom = binom * (n_sites - k) as f64 / (k + 1) as f64;
    }
    let scale = if n_sites.is_multiple_of(2) {
        0.5f64.powi((n_sites / 2) as i32)
    } else {
        0.5f64.powi((n_sites / 2) as i32) * std::f64::consts::FRAC_1_SQRT_2
    };
    Ok((settings, scale * sum))
}
