//! The nonlinear Bell functional, its linear sign-function relatives, the
//! classical deterministic value, and the local white-noise variants.
//!
//! Noise is applied through the channel adjoint acting on the per-site
//! operators, `B -> (1-lambda) B + lambda (Tr B / 2) I`, which is an exact
//! algebraic identity for the qubit depolarizing map. The explicit
//! subset-sum density operator is kept as a small-system oracle so the two
//! routes can be checked against each other.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::qcore::{
    expectation_table, BOperatorTable, MeasurementSettings, PureState,
};
use crate::{Error, Result};

/// Largest `n_sites` for which the dense density-operator oracle runs.
pub const ORACLE_SITE_CAP: usize = 6;

/// A table of `2^N` signs, one linear Bell inequality per table.
///
/// Indexed by the setting choice `X` read as a binary integer with `x_1`
/// the most significant bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFunction {
    n_sites: usize,
    signs: Vec<i8>,
}

impl SignFunction {
    pub fn new(n_sites: usize, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != 1usize << n_sites {
            return Err(Error::InvalidSignFunction {
                reason: format!(
                    "table has {} entries, expected 2^{n_sites}",
                    signs.len()
                ),
            });
        }
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidSignFunction {
                reason: format!("entries must be +1 or -1, got {bad}"),
            });
        }
        Ok(Self { n_sites, signs })
    }

    pub fn all_plus(n_sites: usize) -> Self {
        Self {
            n_sites,
            signs: vec![1; 1 << n_sites],
        }
    }

    /// The pointwise sign of an expectation table, with `sign(0) = +1`.
    /// This is the sign function whose linear value equals `Q_NL`.
    pub fn from_expectations(expectations: &[f64]) -> Result<Self> {
        if !expectations.len().is_power_of_two() {
            return Err(Error::InvalidSignFunction {
                reason: format!(
                    "expectation table length {} is not a power of two",
                    expectations.len()
                ),
            });
        }
        let n_sites = expectations.len().trailing_zeros() as usize;
        let signs = expectations
            .iter()
            .map(|e| if *e < 0.0 { -1 } else { 1 })
            .collect();
        Ok(Self { n_sites, signs })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn sign(&self, index: usize) -> f64 {
        f64::from(self.signs[index])
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }
}

/// Strength of the local white-noise channel, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidNoiseLevel { lambda });
        }
        Ok(Self(lambda))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A dense `d^N x d^N` density operator. Oracle use only.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    d: usize,
    n_sites: usize,
    entries: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness.
    pub fn new(d: usize, n_sites: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = crate::qcore::hilbert_dim(d, n_sites).ok_or(Error::NotDensity {
            reason: "dimension overflow".into(),
        })?;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::NotDensity {
                reason: format!(
                    "matrix is {}x{}, expected {dim}x{dim}",
                    entries.nrows(),
                    entries.ncols()
                ),
            });
        }
        let herm_dev = crate::qcore::hermitian_deviation(&entries);
        if herm_dev > 1e-10 {
            return Err(Error::NotDensity {
                reason: format!("not Hermitian, max deviation {herm_dev:e}"),
            });
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::NotDensity {
                reason: format!("trace is {trace}, expected 1"),
            });
        }
        let eig = nalgebra::SymmetricEigen::new(entries.clone());
        if let Some(min) = eig
            .eigenvalues
            .iter()
            .copied()
            .min_by(|a, b| a.partial_cmp(b).unwrap())
        {
            if min < -1e-10 {
                return Err(Error::NotDensity {
                    reason: format!("negative eigenvalue {min:e}"),
                });
            }
        }
        Ok(Self { d, n_sites, entries })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

/// The nonlinear Bell functional `Q_NL = sum_X |<psi| (x)_j B_{j,x_j} |psi>|`.
///
/// Classical ceiling 1; quantum ceiling `2^((N-1)/2)`.
pub fn qnl(state: &PureState, settings: &MeasurementSettings) -> Result<f64> {
    let table = BOperatorTable::from_settings(settings);
    qnl_with_table(state, &table)
}

/// [`qnl`] against a prebuilt (possibly noise-modified) operator table.
pub fn qnl_with_table(state: &PureState, table: &BOperatorTable) -> Result<f64> {
    Ok(expectation_table(state, table)?
        .iter()
        .map(|e| e.abs())
        .sum())
}

/// The linear Bell value `sum_X S(X) <psi| (x)_j B_{j,x_j} |psi>`.
///
/// Satisfies `|linear_value| <= qnl`, with equality when `S` is the
/// pointwise sign of the expectations.
pub fn linear_value(
    state: &PureState,
    settings: &MeasurementSettings,
    s: &SignFunction,
) -> Result<f64> {
    if s.n_sites() != settings.n_sites() {
        return Err(Error::ShapeMismatch {
            context: format!(
                "sign function has {} sites, settings have {}",
                s.n_sites(),
                settings.n_sites()
            ),
        });
    }
    let table = BOperatorTable::from_settings(settings);
    let expectations = expectation_table(state, &table)?;
    Ok(expectations
        .iter()
        .enumerate()
        .map(|(ix, e)| s.sign(ix) * e)
        .sum())
}

/// The deterministic classical value of the nonlinear functional.
///
/// For outcome assignments `A_i^j = +/-1`, exactly one setting choice
/// survives the product and the value is always exactly 1.
pub fn classical_nl_value(assignment: &[(i8, i8)]) -> Result<f64> {
    for &(a0, a1) in assignment {
        for a in [a0, a1] {
            if a != 1 && a != -1 {
                return Err(Error::InvalidAssignment { got: a });
            }
        }
    }
    let n = assignment.len();
    let mut total = 0.0f64;
    for ix in 0..1usize << n {
        let mut product = 1.0f64;
        for (site, &(a0, a1)) in assignment.iter().enumerate() {
            let bit = (ix >> (n - 1 - site)) & 1;
            let sign = if bit == 0 { 1.0 } else { -1.0 };
            product *= (f64::from(a0) + sign * f64::from(a1)) / 2.0;
        }
        total += product.abs();
    }
    Ok(total)
}

/// Moves the qubit depolarizing channel onto the operator table:
/// `B' = (1-lambda) B + lambda (Tr B / 2) I` per site and setting.
///
/// Exact adjoint of the state map, so expectations against `B'` equal
/// expectations of the noisy state against `B`.
pub fn dual_channel_settings(
    settings: &MeasurementSettings,
    noise: NoiseLevel,
) -> Result<BOperatorTable> {
    if settings.d() != 2 {
        return Err(Error::NoiseRequiresQubits { d: settings.d() });
    }
    Ok(dual_channel_table(
        &BOperatorTable::from_settings(settings),
        noise,
    ))
}

/// [`dual_channel_settings`] acting directly on an operator table (d = 2).
pub fn dual_channel_table(table: &BOperatorTable, noise: NoiseLevel) -> BOperatorTable {
    let lambda = noise.value();
    let d = table.d();
    let mut out = table.clone();
    for site in 0..table.n_sites() {
        for x in 0..2u8 {
            out.set_op(site, x, depolarize_observable(table.op(site, x), lambda));
        }
    }
    debug_assert_eq!(d, 2);
    out
}

/// `(1-lambda) M + lambda (Tr M / 2) I` on a 2x2 matrix.
pub(crate) fn depolarize_observable(
    m: &DMatrix<Complex64>,
    lambda: f64,
) -> DMatrix<Complex64> {
    let d = m.nrows();
    let shift = m.trace() * Complex64::new(lambda / 2.0, 0.0);
    let mut out = m.scale(1.0 - lambda);
    for i in 0..d {
        out[(i, i)] += shift;
    }
    out
}

/// `Q_NL` of the state after per-qubit white noise of strength `lambda`,
/// evaluated through the dual channel.
pub fn qnl_noisy(
    state: &PureState,
    settings: &MeasurementSettings,
    noise: NoiseLevel,
) -> Result<f64> {
    if state.d() != 2 || settings.d() != 2 {
        return Err(Error::NoiseRequiresQubits {
            d: state.d().max(settings.d()),
        });
    }
    if noise.value() == 0.0 {
        // Identity channel: take the noiseless path bit for bit.
        return qnl(state, settings);
    }
    let table = dual_channel_settings(settings, noise)?;
    qnl_with_table(state, &table)
}

/// The noisy state as an explicit subset sum
/// `sum_k lambda^k (1-lambda)^(N-k) sum_{|Pc|=k} Tr_Pc |psi><psi| (x) I_Pc / 2^k`.
///
/// Dense oracle; capped at [`ORACLE_SITE_CAP`] sites.
pub fn noisy_density(state: &PureState, noise: NoiseLevel) -> Result<DensityOperator> {
    if state.d() != 2 {
        return Err(Error::NoiseRequiresQubits { d: state.d() });
    }
    let n = state.n_sites();
    if n > ORACLE_SITE_CAP {
        return Err(Error::OracleScale {
            context: "noisy_density",
            n_sites: n,
            cap: ORACLE_SITE_CAP,
        });
    }
    let dim = state.dim();
    let lambda = noise.value();
    let psi = state.amplitudes();
    let rho = DMatrix::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);

    // `mask` has a 1 at each depolarized site's bit position (site 1 is
    // the most significant bit of the flat index).
    for mask in 0..1usize << n {
        let k = mask.count_ones();
        let weight = lambda.powi(k as i32) * (1.0 - lambda).powi((n as u32 - k) as i32);
        if weight == 0.0 {
            continue;
        }
        let scale = weight / f64::from(1u32 << k);
        for i in 0..dim {
            for j in 0..dim {
                if i & mask != j & mask {
                    continue;
                }
                // Partial trace over the masked sites: sum the kept-site
                // block over all assignments of the masked bits.
                let mut acc = Complex64::ZERO;
                let i_keep = i & !mask;
                let j_keep = j & !mask;
                let mut sub = mask;
                loop {
                    acc += rho[(i_keep | sub, j_keep | sub)];
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
                out[(i, j)] += acc * Complex64::new(scale, 0.0);
            }
        }
    }
    DensityOperator::new(2, n, out)
}

/// `Q_NL` of a dense density operator by direct contraction with the
/// materialized tensor products. Oracle use only.
pub fn qnl_density(rho: &DensityOperator, settings: &MeasurementSettings) -> Result<f64> {
    if rho.d() != settings.d() || rho.n_sites() != settings.n_sites() {
        return Err(Error::ShapeMismatch {
            context: format!(
                "density is d={}, n={}; settings are d={}, n={}",
                rho.d(),
                rho.n_sites(),
                settings.d(),
                settings.n_sites()
            ),
        });
    }
    let n = rho.n_sites();
    if n > ORACLE_SITE_CAP {
        return Err(Error::OracleScale {
            context: "qnl_density",
            n_sites: n,
            cap: ORACLE_SITE_CAP,
        });
    }
    let table = BOperatorTable::from_settings(settings);
    let mut total = 0.0f64;
    for ix in 0..1usize << n {
        let mut op = DMatrix::<Complex64>::identity(1, 1);
        for site in 0..n {
            let bit = ((ix >> (n - 1 - site)) & 1) as u8;
            op = op.kronecker(table.op(site, bit));
        }
        let value = (&op * rho.entries()).trace();
        total += value.norm();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{
        balanced_ghz, b_operator, ghz_state, haar_state, sample_settings, DichotomicPair,
        ObservableMatrix,
    };

    fn xy_settings(n: usize) -> MeasurementSettings {
        let pairs = (0..n)
            .map(|_| {
                DichotomicPair::new(ObservableMatrix::pauli_x(), ObservableMatrix::pauli_y())
                    .unwrap()
            })
            .collect();
        MeasurementSettings::new(pairs).unwrap()
    }

    fn zz_settings(n: usize) -> MeasurementSettings {
        let pairs = (0..n)
            .map(|_| {
                DichotomicPair::new(ObservableMatrix::pauli_z(), ObservableMatrix::pauli_z())
                    .unwrap()
            })
            .collect();
        MeasurementSettings::new(pairs).unwrap()
    }

    #[test]
    fn ghz3_xy_value_is_two() {
        let psi = balanced_ghz(3).unwrap();
        let value = qnl(&psi, &xy_settings(3)).unwrap();
        assert!((value - 2.0).abs() < 1e-12, "got {value}");
    }

    #[test]
    fn ghz2_xy_value_is_one() {
        let psi = balanced_ghz(2).unwrap();
        let value = qnl(&psi, &xy_settings(2)).unwrap();
        assert!((value - 1.0).abs() < 1e-12, "got {value}");
    }

    #[test]
    fn product_state_diag_value_is_one() {
        let psi = ghz_state(Complex64::ONE, Complex64::ZERO, 3).unwrap();
        let value = qnl(&psi, &zz_settings(3)).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pointwise_sign_function_reaches_qnl() {
        let psi = haar_state(2, 3, 21).unwrap();
        let settings = sample_settings(2, 3, 22, false).unwrap();
        let table = BOperatorTable::from_settings(&settings);
        let expectations = expectation_table(&psi, &table).unwrap();
        let s = SignFunction::from_expectations(&expectations).unwrap();
        let lin = linear_value(&psi, &settings, &s).unwrap();
        let q = qnl(&psi, &settings).unwrap();
        assert!((lin - q).abs() < 1e-12);
    }

    #[test]
    fn mermin_sign_function_reaches_two() {
        let psi = balanced_ghz(3).unwrap();
        let settings = xy_settings(3);
        let table = BOperatorTable::from_settings(&settings);
        let expectations = expectation_table(&psi, &table).unwrap();
        let s = SignFunction::from_expectations(&expectations).unwrap();
        let lin = linear_value(&psi, &settings, &s).unwrap();
        assert!((lin - 2.0).abs() < 1e-12);
    }

    #[test]
    fn all_plus_signs_on_product_state() {
        let psi = ghz_state(Complex64::ONE, Complex64::ZERO, 2).unwrap();
        let lin = linear_value(&psi, &zz_settings(2), &SignFunction::all_plus(2)).unwrap();
        assert!((lin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_value_is_always_one() {
        assert_eq!(classical_nl_value(&[(1, 1); 3]).unwrap(), 1.0);
        assert_eq!(classical_nl_value(&[(1, -1); 3]).unwrap(), 1.0);
        // Exhaustive over all assignments at N = 4.
        for code in 0..1u32 << 8 {
            let assignment: Vec<(i8, i8)> = (0..4)
                .map(|j| {
                    let a0 = if code >> (2 * j) & 1 == 0 { 1 } else { -1 };
                    let a1 = if code >> (2 * j + 1) & 1 == 0 { 1 } else { -1 };
                    (a0, a1)
                })
                .collect();
            assert_eq!(classical_nl_value(&assignment).unwrap(), 1.0);
        }
    }

    #[test]
    fn classical_value_rejects_bad_outcomes() {
        assert!(classical_nl_value(&[(1, 0)]).is_err());
        assert!(classical_nl_value(&[(2, 1)]).is_err());
    }

    #[test]
    fn dual_channel_limits() {
        let settings = sample_settings(2, 2, 3, false).unwrap();
        let table = BOperatorTable::from_settings(&settings);
        let same = dual_channel_table(&table, NoiseLevel::new(0.0).unwrap());
        assert_eq!(table, same);

        // lambda = 1 sends traceless operators to zero.
        let xy = xy_settings(1);
        let mixed = dual_channel_settings(&xy, NoiseLevel::new(1.0).unwrap()).unwrap();
        for x in 0..2u8 {
            assert!(mixed.op(0, x).iter().all(|e| e.norm() < 1e-15));
        }
    }

    #[test]
    fn dual_channel_half_noise_arithmetic() {
        // B = diag(1, 0) from A0 = sigma_z, A1 = I: B' = diag(0.75, 0.25).
        let pair = DichotomicPair::new(
            ObservableMatrix::pauli_z(),
            ObservableMatrix::identity(2),
        )
        .unwrap();
        let b = b_operator(&pair, 0);
        let out = depolarize_observable(b.entries(), 0.5);
        assert!((out[(0, 0)] - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        assert!((out[(1, 1)] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        assert!(out[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn qnl_noisy_noiseless_limit() {
        let psi = haar_state(2, 3, 8).unwrap();
        let settings = sample_settings(2, 3, 9, false).unwrap();
        let a = qnl(&psi, &settings).unwrap();
        let b = qnl_noisy(&psi, &settings, NoiseLevel::new(0.0).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn qnl_noisy_traceless_factorization() {
        // All-traceless settings: Q_NL^lambda = (1-lambda)^N Q_NL.
        let psi = balanced_ghz(3).unwrap();
        let settings = xy_settings(3);
        let q0 = qnl(&psi, &settings).unwrap();
        let q = qnl_noisy(&psi, &settings, NoiseLevel::new(0.5).unwrap()).unwrap();
        assert!((q - q0 * 0.125).abs() < 1e-12, "got {q}");
        assert!((q - 0.25).abs() < 1e-12);
        let q1 = qnl_noisy(&psi, &settings, NoiseLevel::new(1.0).unwrap()).unwrap();
        assert!(q1.abs() < 1e-12);
    }

    #[test]
    fn noisy_density_limits() {
        let psi = haar_state(2, 2, 13).unwrap();
        let rho0 = noisy_density(&psi, NoiseLevel::new(0.0).unwrap()).unwrap();
        let amps = psi.amplitudes();
        for i in 0..4 {
            for j in 0..4 {
                let expect = amps[i] * amps[j].conj();
                assert!((rho0.entries()[(i, j)] - expect).norm() < 1e-12);
            }
        }
        let rho1 = noisy_density(&psi, NoiseLevel::new(1.0).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j {
                    Complex64::new(0.25, 0.0)
                } else {
                    Complex64::ZERO
                };
                assert!((rho1.entries()[(i, j)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn noisy_density_is_capped() {
        let psi = haar_state(2, 7, 1).unwrap();
        assert!(matches!(
            noisy_density(&psi, NoiseLevel::new(0.5).unwrap()),
            Err(Error::OracleScale { .. })
        ));
    }

    #[test]
    fn density_route_matches_pure_state() {
        let psi = haar_state(2, 3, 17).unwrap();
        let settings = sample_settings(2, 3, 18, false).unwrap();
        let rho = noisy_density(&psi, NoiseLevel::new(0.0).unwrap()).unwrap();
        let via_density = qnl_density(&rho, &settings).unwrap();
        let direct = qnl(&psi, &settings).unwrap();
        assert!((via_density - direct).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_state_is_classical() {
        let psi = haar_state(2, 3, 23).unwrap();
        let rho = noisy_density(&psi, NoiseLevel::new(1.0).unwrap()).unwrap();
        for seed in 0..10u64 {
            let settings = sample_settings(2, 3, 300 + seed, false).unwrap();
            let value = qnl_density(&rho, &settings).unwrap();
            assert!(value <= 1.0 + 1e-10, "got {value}");
        }
    }

    #[test]
    fn noise_level_is_validated() {
        assert!(NoiseLevel::new(-0.1).is_err());
        assert!(NoiseLevel::new(1.1).is_err());
    }
}
