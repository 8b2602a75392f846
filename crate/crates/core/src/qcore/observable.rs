//! Dichotomic observables, measurement settings, and their geometry.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{HERMITICITY_TOL, STRUCTURAL_TOL};
use crate::{Error, Result};

/// A Hermitian `d x d` matrix.
///
/// Measurement observables are additionally involutions (`A^2 = I`,
/// enforced by [`DichotomicPair`]); derived half-sum operators
/// (`b_operator`) only satisfy `||B|| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableMatrix {
    d: usize,
    entries: DMatrix<Complex64>,
}

impl ObservableMatrix {
    /// Validates Hermiticity.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "observable must be square and nonempty, got {}x{}",
                    entries.nrows(),
                    entries.ncols()
                ),
            });
        }
        let max_dev = hermitian_deviation(&entries);
        if max_dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_dev });
        }
        Ok(Self {
            d: entries.nrows(),
            entries,
        })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_hermitian_unchecked(entries: DMatrix<Complex64>) -> Self {
        debug_assert!(hermitian_deviation(&entries) <= 1e-9);
        Self {
            d: entries.nrows(),
            entries,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_hermitian_unchecked(DMatrix::identity(d, d))
    }

    pub fn minus_identity(d: usize) -> Self {
        Self::from_hermitian_unchecked(-DMatrix::<Complex64>::identity(d, d))
    }

    pub fn pauli_x() -> Self {
        Self::from_hermitian_unchecked(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ZERO,
                Complex64::ONE,
                Complex64::ONE,
                Complex64::ZERO,
            ],
        ))
    }

    pub fn pauli_y() -> Self {
        Self::from_hermitian_unchecked(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::ZERO,
            ],
        ))
    }

    pub fn pauli_z() -> Self {
        Self::from_hermitian_unchecked(DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ZERO,
                -Complex64::ONE,
            ],
        ))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Trace (real for Hermitian matrices).
    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// Operator norm, i.e. the largest eigenvalue magnitude.
    pub fn operator_norm(&self) -> f64 {
        hermitian_opnorm(&self.entries)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.entries.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals
    }

    /// Max entrywise deviation of `A*A` from the identity.
    pub fn involution_deviation(&self) -> f64 {
        let sq = &self.entries * &self.entries;
        let mut max_dev = 0.0f64;
        for i in 0..self.d {
            for j in 0..self.d {
                let target = if i == j { Complex64::ONE } else { Complex64::ZERO };
                max_dev = max_dev.max((sq[(i, j)] - target).norm());
            }
        }
        max_dev
    }

    /// True when both eigenvalues +1 and -1 are present, i.e. the
    /// observable is an involution other than `I` or `-I`. For involutions
    /// this is equivalent to `|Tr A| <= d - 2`.
    pub fn is_nondull(&self) -> bool {
        self.trace().abs() <= self.d as f64 - 2.0 + STRUCTURAL_TOL
    }
}

/// Max entrywise deviation from Hermiticity.
pub(crate) fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut max_dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            max_dev = max_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    max_dev
}

/// Operator norm of a Hermitian matrix via eigendecomposition.
pub(crate) fn hermitian_opnorm(m: &DMatrix<Complex64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// A pair of Hermitian involutions `(A_0, A_1)` acting on one site.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicPair {
    a0: ObservableMatrix,
    a1: ObservableMatrix,
}

impl DichotomicPair {
    /// Validates that both members are involutions of the same dimension.
    pub fn new(a0: ObservableMatrix, a1: ObservableMatrix) -> Result<Self> {
        if a0.d() != a1.d() {
            return Err(Error::ShapeMismatch {
                context: format!("pair members have d = {} and d = {}", a0.d(), a1.d()),
            });
        }
        for a in [&a0, &a1] {
            let dev = a.involution_deviation();
            if dev > STRUCTURAL_TOL {
                return Err(Error::NotInvolution { max_dev: dev });
            }
        }
        Ok(Self { a0, a1 })
    }

    pub fn d(&self) -> usize {
        self.a0.d()
    }

    pub fn a0(&self) -> &ObservableMatrix {
        &self.a0
    }

    pub fn a1(&self) -> &ObservableMatrix {
        &self.a1
    }

    /// True when both observables have mixed spectrum, i.e. the site can
    /// contribute a violation on its own.
    pub fn is_nondull(&self) -> bool {
        self.a0.is_nondull() && self.a1.is_nondull()
    }
}

/// The half-sum operator `B_x = (A_0 + (-1)^x A_1) / 2`.
///
/// Hermitian with operator norm at most 1.
pub fn b_operator(pair: &DichotomicPair, x: u8) -> ObservableMatrix {
    let sign = if x & 1 == 0 { 1.0 } else { -1.0 };
    let entries = (pair.a0.entries() + pair.a1.entries() * Complex64::new(sign, 0.0))
        .scale(0.5);
    ObservableMatrix::from_hermitian_unchecked(entries)
}

/// One choice of observables per site: the collection the Bell functional
/// is optimized over.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSettings {
    d: usize,
    pairs: Vec<DichotomicPair>,
    nondull_flag: bool,
}

impl MeasurementSettings {
    pub fn new(pairs: Vec<DichotomicPair>) -> Result<Self> {
        let d = match pairs.first() {
            Some(p) => p.d(),
            None => {
                return Err(Error::ShapeMismatch {
                    context: "settings need at least one site".into(),
                })
            }
        };
        if pairs.iter().any(|p| p.d() != d) {
            return Err(Error::ShapeMismatch {
                context: "all pairs in a settings collection must share d".into(),
            });
        }
        let nondull_flag = pairs.iter().any(DichotomicPair::is_nondull);
        Ok(Self {
            d,
            pairs,
            nondull_flag,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[DichotomicPair] {
        &self.pairs
    }

    pub fn pair(&self, site: usize) -> &DichotomicPair {
        &self.pairs[site]
    }

    /// True when at least one site has two mixed-spectrum observables.
    pub fn is_nondull(&self) -> bool {
        self.nondull_flag
    }

    /// Replaces one site's pair, recomputing the non-dull flag.
    pub fn replace_pair(&mut self, site: usize, pair: DichotomicPair) -> Result<()> {
        if site >= self.pairs.len() {
            return Err(Error::SiteIndex {
                site,
                n_sites: self.pairs.len(),
            });
        }
        if pair.d() != self.d {
            return Err(Error::ShapeMismatch {
                context: format!("replacement pair has d = {}, settings have d = {}", pair.d(), self.d),
            });
        }
        self.pairs[site] = pair;
        self.nondull_flag = self.pairs.iter().any(DichotomicPair::is_nondull);
        Ok(())
    }
}

/// One choice of setting bits `X = (x_1, ..., x_N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SettingIndex {
    bits: Vec<u8>,
}

impl SettingIndex {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::ShapeMismatch {
                context: "setting bits must be 0 or 1".into(),
            });
        }
        Ok(Self { bits })
    }

    /// Decodes a flat index, `x_1` being the most significant bit.
    pub fn from_index(index: usize, n_sites: usize) -> Self {
        let bits = (0..n_sites)
            .map(|j| ((index >> (n_sites - 1 - j)) & 1) as u8)
            .collect();
        Self { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn n_sites(&self) -> usize {
        self.bits.len()
    }

    /// Flat index with `x_1` as the most significant bit.
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0usize, |acc, b| (acc << 1) | *b as usize)
    }
}

/// Sup over sites and setting labels of the operator-norm distance between
/// corresponding observables.
pub fn settings_distance(q: &MeasurementSettings, q2: &MeasurementSettings) -> Result<f64> {
    if q.d() != q2.d() || q.n_sites() != q2.n_sites() {
        return Err(Error::ShapeMismatch {
            context: "settings distance requires matching d and n_sites".into(),
        });
    }
    let mut sup = 0.0f64;
    for (p, p2) in q.pairs().iter().zip(q2.pairs()) {
        for (a, a2) in [(p.a0(), p2.a0()), (p.a1(), p2.a1())] {
            let diff = a.entries() - a2.entries();
            sup = sup.max(hermitian_opnorm(&diff));
        }
    }
    Ok(sup)
}
