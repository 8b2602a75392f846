//! Dense complex linear-algebra core: pure states, dichotomic observables,
//! tensor-product expectation kernels, Haar sampling, and settings geometry.
//!
//! Index convention: a product basis state `|i_1 ... i_N>` of `N` sites with
//! local dimension `d` is stored at the flat index
//! `I = sum_j i_j * d^(N - j)`, i.e. site 1 is the most significant base-`d`
//! digit. Setting indices `X = (x_1, ..., x_N)` are read the same way, with
//! `x_1` the most significant bit.

mod expectation;
mod files;
mod observable;
mod sample;
mod state;

pub use expectation::{
    expectation_table, product_expectation, product_expectation_table, BOperatorTable,
};
pub use files::{read_settings, read_state, write_settings, write_state};
pub use observable::{
    b_operator, settings_distance, DichotomicPair, MeasurementSettings, ObservableMatrix,
    SettingIndex,
};
pub use sample::{random_hermitian, sample_settings};
pub use state::{
    balanced_ghz, ghz_state, haar_state, haar_state_capped, PureState, DEFAULT_AMPLITUDE_CAP,
};

pub(crate) use expectation::{apply_site_op, inner_product};
pub(crate) use observable::hermitian_deviation;

/// Tolerance for unit-norm checks on state vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Tolerance for Hermiticity checks on observables.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Tolerance for structural identities (involutions, trace relations).
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Computes `d^n_sites`, or `None` on overflow.
pub(crate) fn hilbert_dim(d: usize, n_sites: usize) -> Option<usize> {
    let mut dim = 1usize;
    for _ in 0..n_sites {
        dim = dim.checked_mul(d)?;
    }
    Some(dim)
}

/// Flat-index stride of one step in the given site's digit (0-based site).
pub(crate) fn site_stride(d: usize, n_sites: usize, site: usize) -> usize {
    d.pow((n_sites - 1 - site) as u32)
}
