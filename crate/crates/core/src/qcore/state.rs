//! Pure states of `N` qudits and their random/structured constructors.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{hilbert_dim, NORMALIZATION_TOL};
use crate::{Error, Result};

/// Default cap on the number of amplitudes a constructor will allocate.
pub const DEFAULT_AMPLITUDE_CAP: usize = 1 << 24;

/// A normalized pure state of `n_sites` qudits of local dimension `d`.
///
/// Amplitudes are stored with site 1 as the most significant base-`d`
/// digit of the flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    d: usize,
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validates the dimension bookkeeping and the unit norm.
    pub fn new(d: usize, n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if d < 2 || n_sites < 1 {
            return Err(Error::ShapeMismatch {
                context: format!("need d >= 2 and n_sites >= 1, got d={d}, n_sites={n_sites}"),
            });
        }
        let expected = hilbert_dim(d, n_sites).ok_or(Error::CapacityExceeded {
            requested: u128::MAX,
            cap: usize::MAX,
        })?;
        if amplitudes.len() != expected {
            return Err(Error::AmplitudeCount {
                d,
                n_sites,
                expected,
                got: amplitudes.len(),
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                norm_sqr,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(Self {
            d,
            n_sites,
            amplitudes,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Euclidean distance `|| |psi> - |phi> ||` between two state vectors.
    pub fn distance(&self, other: &PureState) -> Result<f64> {
        if self.d != other.d || self.n_sites != other.n_sites {
            return Err(Error::ShapeMismatch {
                context: "state distance requires matching d and n_sites".into(),
            });
        }
        let sum: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(sum.sqrt())
    }
}

/// Samples a state uniformly on the unit sphere of `(C^d)^(tensor n_sites)`.
///
/// Standard construction: independent standard complex Gaussian entries,
/// normalized. The amplitudes are drawn in index order (real part first),
/// so a given seed yields the same vector bit for bit on every run.
pub fn haar_state(d: usize, n_sites: usize, seed: u64) -> Result<PureState> {
    haar_state_capped(d, n_sites, seed, DEFAULT_AMPLITUDE_CAP)
}

/// [`haar_state`] with an explicit cap on the allocated amplitude count.
pub fn haar_state_capped(d: usize, n_sites: usize, seed: u64, cap: usize) -> Result<PureState> {
    if d < 2 || n_sites < 1 {
        return Err(Error::ShapeMismatch {
            context: format!("need d >= 2 and n_sites >= 1, got d={d}, n_sites={n_sites}"),
        });
    }
    let dim = checked_dim(d, n_sites, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut amplitudes = Vec::with_capacity(dim);
    let mut norm_sqr = 0.0f64;
    for _ in 0..dim {
        let re: f64 = normal.sample(&mut rng);
        let im: f64 = normal.sample(&mut rng);
        norm_sqr += re * re + im * im;
        amplitudes.push(Complex64::new(re, im));
    }
    let inv = 1.0 / norm_sqr.sqrt();
    for a in &mut amplitudes {
        *a *= inv;
    }
    PureState::new(d, n_sites, amplitudes)
}

/// The generalized GHZ state `alpha |0...0> + beta |1...1>` of `n_sites`
/// qubits.
pub fn ghz_state(alpha: Complex64, beta: Complex64, n_sites: usize) -> Result<PureState> {
    if n_sites < 2 {
        return Err(Error::ShapeMismatch {
            context: format!("GHZ state needs n_sites >= 2, got {n_sites}"),
        });
    }
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized {
            norm_sqr,
            tol: 1e-10,
        });
    }
    let dim = checked_dim(2, n_sites, DEFAULT_AMPLITUDE_CAP)?;
    let mut amplitudes = vec![Complex64::ZERO; dim];
    amplitudes[0] = alpha;
    amplitudes[dim - 1] = beta;
    PureState::new(2, n_sites, amplitudes)
}

/// The balanced GHZ state with `alpha = beta = 1/sqrt(2)`.
pub fn balanced_ghz(n_sites: usize) -> Result<PureState> {
    let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ghz_state(c, c, n_sites)
}

fn checked_dim(d: usize, n_sites: usize, cap: usize) -> Result<usize> {
    let mut dim = 1u128;
    for _ in 0..n_sites {
        dim *= d as u128;
        if dim > cap as u128 {
            return Err(Error::CapacityExceeded {
                requested: (d as u128).pow(n_sites as u32),
                cap,
            });
        }
    }
    Ok(dim as usize)
}
