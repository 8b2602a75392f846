//! Random measurement settings.
//!
//! The measurement space carries no canonical probability measure; we draw
//! each observable as `msign(H)` of a Gaussian Hermitian matrix `H`, which
//! gives full-support, basis-invariant samples. Survey outputs flag this
//! choice in their provenance block.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::observable::{DichotomicPair, MeasurementSettings};
use crate::{Error, Result};

/// A GUE-like Hermitian matrix: `(G + G^dagger) / 2` with independent
/// standard complex Gaussian entries in `G`, drawn row major.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        // from_fn fills column major; the draw order is fixed either way.
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    (&g + g.adjoint()).scale(0.5)
}

/// Draws random settings: one pair of Hermitian involutions per site.
///
/// With `require_nondull`, whole draws are rejected until at least one
/// site has two mixed-spectrum observables (so the trace condition
/// `|Tr B_0| + |Tr B_1| <= d - 2` holds there). Deterministic in `seed`.
pub fn sample_settings(
    d: usize,
    n_sites: usize,
    seed: u64,
    require_nondull: bool,
) -> Result<MeasurementSettings> {
    if d < 2 || n_sites < 1 {
        return Err(Error::ShapeMismatch {
            context: format!("need d >= 2 and n_sites >= 1, got d={d}, n_sites={n_sites}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut pairs = Vec::with_capacity(n_sites);
        for _ in 0..n_sites {
            let a0 = crate::optimize::msign(&random_hermitian(d, &mut rng))?;
            let a1 = crate::optimize::msign(&random_hermitian(d, &mut rng))?;
            pairs.push(DichotomicPair::new(a0, a1)?);
        }
        let settings = MeasurementSettings::new(pairs)?;
        if !require_nondull || settings.is_nondull() {
            return Ok(settings);
        }
    }
}
