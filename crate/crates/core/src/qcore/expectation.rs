//! Tensor-product expectation kernels.
//!
//! No `d^N x d^N` operator is ever materialized: each site's `B` operator
//! is applied locally to the state vector. The full table over all `2^N`
//! setting choices walks the binary tree of prefixes depth first, so each
//! partial application is shared by every leaf below it (cost
//! `O(2^N d^(N+1))` instead of the naive `O(N 2^N d^(N+1))`).

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::observable::{b_operator, MeasurementSettings, SettingIndex};
use super::site_stride;
use super::state::PureState;
use crate::{Error, Result};

/// Per-site table of the two derived operators `B_{j,0}`, `B_{j,1}`.
///
/// This is the representation the evaluation kernels run on; noise models
/// produce modified tables with the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct BOperatorTable {
    d: usize,
    ops: Vec<[DMatrix<Complex64>; 2]>,
}

impl BOperatorTable {
    pub fn from_settings(settings: &MeasurementSettings) -> Self {
        let ops = settings
            .pairs()
            .iter()
            .map(|pair| {
                [
                    b_operator(pair, 0).entries().clone(),
                    b_operator(pair, 1).entries().clone(),
                ]
            })
            .collect();
        Self {
            d: settings.d(),
            ops,
        }
    }

    /// Builds a table directly from per-site operator pairs.
    pub fn from_ops(d: usize, ops: Vec<[DMatrix<Complex64>; 2]>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::ShapeMismatch {
                context: "operator table needs at least one site".into(),
            });
        }
        for pair in &ops {
            for m in pair {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::ShapeMismatch {
                        context: format!("table entry is {}x{}, expected {d}x{d}", m.nrows(), m.ncols()),
                    });
                }
            }
        }
        Ok(Self { d, ops })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.ops.len()
    }

    pub fn op(&self, site: usize, x: u8) -> &DMatrix<Complex64> {
        &self.ops[site][(x & 1) as usize]
    }

    pub fn set_op(&mut self, site: usize, x: u8, m: DMatrix<Complex64>) {
        self.ops[site][(x & 1) as usize] = m;
    }

    /// Traces of all entries, `(Tr B_{j,0}, Tr B_{j,1})` per site.
    pub fn traces(&self) -> Vec<[f64; 2]> {
        self.ops
            .iter()
            .map(|pair| [pair[0].trace().re, pair[1].trace().re])
            .collect()
    }
}

/// Applies a `d x d` operator to one site of a state vector.
///
/// The qubit case carries the see-saw hot loop, so it is unrolled with the
/// four coefficients held in registers.
pub(crate) fn apply_site_op(
    dst: &mut [Complex64],
    src: &[Complex64],
    m: &DMatrix<Complex64>,
    d: usize,
    stride: usize,
) {
    let block = d * stride;
    debug_assert_eq!(dst.len(), src.len());
    debug_assert_eq!(src.len() % block, 0);
    if d == 2 {
        let (c00, c01, c10, c11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        for (dst_block, src_block) in dst.chunks_exact_mut(block).zip(src.chunks_exact(block)) {
            let (d0, d1) = dst_block.split_at_mut(stride);
            let (s0, s1) = src_block.split_at(stride);
            for l in 0..stride {
                d0[l] = c00 * s0[l] + c01 * s1[l];
                d1[l] = c10 * s0[l] + c11 * s1[l];
            }
        }
        return;
    }
    dst.fill(Complex64::ZERO);
    for i in 0..d {
        for k in 0..d {
            let c = m[(i, k)];
            if c == Complex64::ZERO {
                continue;
            }
            for base in (0..src.len()).step_by(block) {
                let out = &mut dst[base + i * stride..base + i * stride + stride];
                let inp = &src[base + k * stride..base + k * stride + stride];
                for (o, s) in out.iter_mut().zip(inp) {
                    *o += c * s;
                }
            }
        }
    }
}

/// `<a|b>` with the physics convention (conjugate-linear in `a`).
pub(crate) fn inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// The expectation value `<psi| (x) B_{j,x_j} |psi>` for one setting choice.
///
/// Real (up to rounding) since every factor is Hermitian; the real part is
/// returned. Value lies in `[-1, 1]`.
pub fn product_expectation(
    state: &PureState,
    settings: &MeasurementSettings,
    x: &SettingIndex,
) -> Result<f64> {
    let table = BOperatorTable::from_settings(settings);
    product_expectation_table(state, &table, x)
}

/// [`product_expectation`] against a prebuilt operator table.
pub fn product_expectation_table(
    state: &PureState,
    table: &BOperatorTable,
    x: &SettingIndex,
) -> Result<f64> {
    check_shapes(state, table)?;
    if x.n_sites() != table.n_sites() {
        return Err(Error::ShapeMismatch {
            context: format!(
                "setting index has {} bits, settings have {} sites",
                x.n_sites(),
                table.n_sites()
            ),
        });
    }
    let d = state.d();
    let n = state.n_sites();
    let mut cur = state.amplitudes().to_vec();
    let mut scratch = vec![Complex64::ZERO; cur.len()];
    for (site, &bit) in x.bits().iter().enumerate() {
        let stride = site_stride(d, n, site);
        apply_site_op(&mut scratch, &cur, table.op(site, bit), d, stride);
        std::mem::swap(&mut cur, &mut scratch);
    }
    Ok(inner_product(state.amplitudes(), &cur).re)
}

/// All `2^N` expectation values, indexed by the setting choice `X` read as
/// a binary integer (`x_1` most significant).
pub fn expectation_table(state: &PureState, table: &BOperatorTable) -> Result<Vec<f64>> {
    check_shapes(state, table)?;
    let n = table.n_sites();
    let mut out = vec![0.0f64; 1 << n];
    let mut buffers: Vec<Vec<Complex64>> = (0..n)
        .map(|_| vec![Complex64::ZERO; state.dim()])
        .collect();
    descend(
        state,
        table,
        0,
        0,
        state.amplitudes(),
        &mut buffers,
        &mut out,
    );
    Ok(out)
}

fn descend(
    state: &PureState,
    table: &BOperatorTable,
    site: usize,
    prefix: usize,
    prev: &[Complex64],
    buffers: &mut [Vec<Complex64>],
    out: &mut [f64],
) {
    if site == table.n_sites() {
        out[prefix] = inner_product(state.amplitudes(), prev).re;
        return;
    }
    let stride = site_stride(state.d(), state.n_sites(), site);
    let (cur, rest) = buffers.split_first_mut().expect("buffer per site");
    for x in 0..2u8 {
        apply_site_op(cur, prev, table.op(site, x), state.d(), stride);
        descend(
            state,
            table,
            site + 1,
            (prefix << 1) | x as usize,
            cur,
            rest,
            out,
        );
    }
}

fn check_shapes(state: &PureState, table: &BOperatorTable) -> Result<()> {
    if state.d() != table.d() || state.n_sites() != table.n_sites() {
        return Err(Error::ShapeMismatch {
            context: format!(
                "state is d={}, n={}; settings are d={}, n={}",
                state.d(),
                state.n_sites(),
                table.d(),
                table.n_sites()
            ),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::observable::{DichotomicPair, ObservableMatrix};
    use crate::qcore::state::{balanced_ghz, ghz_state};

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
    fn ghz3_xy_expectation() {
        // <GHZ_3| B_0 B_0 B_0 |GHZ_3> = 2^(3/2) cos(3 pi/4) / 2^3 = -0.25
        let psi = balanced_ghz(3).unwrap();
        let settings = xy_settings(3);
        let x = SettingIndex::from_bits(vec![0, 0, 0]).unwrap();
        let val = product_expectation(&psi, &settings, &x).unwrap();
        assert!((val - (-0.25)).abs() < 1e-12, "got {val}");
    }

    #[test]
    fn eigenstate_expectation_is_one() {
        let psi = ghz_state(Complex64::ONE, Complex64::ZERO, 2).unwrap();
        let settings = zz_settings(2);
        let x = SettingIndex::from_bits(vec![0, 0]).unwrap();
        assert!((product_expectation(&psi, &settings, &x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_matches_per_index_evaluation() {
        let psi = crate::qcore::haar_state(2, 3, 99).unwrap();
        let settings = crate::qcore::sample_settings(2, 3, 7, false).unwrap();
        let table = BOperatorTable::from_settings(&settings);
        let all = expectation_table(&psi, &table).unwrap();
        for ix in 0..8 {
            let x = SettingIndex::from_index(ix, 3);
            let one = product_expectation(&psi, &settings, &x).unwrap();
            assert!((all[ix] - one).abs() < 1e-13);
        }
    }

    #[test]
    fn expectations_are_bounded_by_one() {
        for seed in 0..20u64 {
            let psi = crate::qcore::haar_state(2, 3, 1000 + seed).unwrap();
            let settings = crate::qcore::sample_settings(2, 3, 2000 + seed, false).unwrap();
            let table = BOperatorTable::from_settings(&settings);
            for v in expectation_table(&psi, &table).unwrap() {
                assert!(v.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let psi = crate::qcore::haar_state(2, 2, 1).unwrap();
        let settings = zz_settings(3);
        let x = SettingIndex::from_bits(vec![0, 0, 0]).unwrap();
        assert!(product_expectation(&psi, &settings, &x).is_err());
    }
}
