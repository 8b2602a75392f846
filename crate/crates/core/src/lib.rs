//! Numerical laboratory for full-correlation Bell inequalities on N-qudit
//! pure states.
//!
//! The crate is organized in four layers:
//!
//! * [`qcore`] — dense complex linear algebra: pure states, dichotomic
//!   observables, tensor-product expectation kernels, Haar sampling, and
//!   the geometry of measurement settings.
//! * [`belleval`] — the nonlinear Bell functional `Q_NL`, its linear
//!   sign-function relatives, the classical deterministic value, and the
//!   local white-noise variants (dual-channel fast path plus a dense
//!   density-operator oracle).
//! * [`optimize`] — see-saw maximization of `Q_NL` over all pairs of
//!   Hermitian involutions, with closed-form references (Horodecki
//!   criterion for two qubits, GHZ/Mermin values) as independent oracles.
//! * [`bounds`] — closed-form evaluation of the concentration-of-measure
//!   machinery: expected-value ceilings, Lipschitz constants, ε-net sizes,
//!   and the tail probability bounds, all evaluated in log space.
//!
//! Everything is a pure function of its inputs plus an explicit 64-bit
//! seed; there is no hidden global RNG state.

pub mod belleval;
pub mod bounds;
pub mod error;
pub mod optimize;
pub mod qcore;
pub mod seeding;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Complex scalar used throughout.
pub type Complex64 = num_complex::Complex<f64>;
