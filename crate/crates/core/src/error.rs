//! Error type shared by all modules.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("requested dimension {requested} exceeds the amplitude cap {cap}")]
    CapacityExceeded { requested: u128, cap: usize },

    #[error("state norm^2 is {norm_sqr}, expected 1 within {tol}")]
    NotNormalized { norm_sqr: f64, tol: f64 },

    #[error("expected {expected} amplitudes for d={d}, n_sites={n_sites}, got {got}")]
    AmplitudeCount {
        d: usize,
        n_sites: usize,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not Hermitian: max |entry(a,b) - conj(entry(b,a))| = {max_dev:e}")]
    NotHermitian { max_dev: f64 },

    #[error("observable is not an involution: max |A*A - I| = {max_dev:e}")]
    NotInvolution { max_dev: f64 },

    #[error("not a density operator: {reason}")]
    NotDensity { reason: String },

    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },

    #[error("site index {site} out of range for {n_sites} sites")]
    SiteIndex { site: usize, n_sites: usize },

    #[error("noise level {lambda} outside [0, 1]")]
    InvalidNoiseLevel { lambda: f64 },

    #[error("the local noise model requires qubits (d = 2), got d = {d}")]
    NoiseRequiresQubits { d: usize },

    #[error("{context}: n_sites = {n_sites} exceeds the dense-oracle cap {cap}")]
    OracleScale {
        context: &'static str,
        n_sites: usize,
        cap: usize,
    },

    #[error("sign table invalid: {reason}")]
    InvalidSignFunction { reason: String },

    #[error("deterministic assignment entries must be +1 or -1, got {got}")]
    InvalidAssignment { got: i8 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("infeasible bound query: {constraint}")]
    InfeasibleBound { constraint: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
