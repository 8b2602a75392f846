//! Deterministic 64-bit seed derivation.
//!
//! Every randomized component takes an explicit seed, and sub-seeds are
//! derived with [`mix64`] rather than by advancing a shared stream. This
//! keeps results independent of evaluation order and worker count.
//!
//! The mixing function is documented bit-exactly so that surveys can be
//! reproduced from their recorded seeds:
//!
//! ```text
//! finalize(z):  z ^= z >> 30;  z *= 0xBF58_476D_1CE4_E5B9;
//!               z ^= z >> 27;  z *= 0x94D0_49BB_1331_11EB;
//!               z ^= z >> 31
//! mix64(a, b) = finalize(a ^ finalize(b ^ 0x9E37_79B9_7F4A_7C15))
//! ```
//!
//! `finalize` is the SplitMix64 avalanche; all multiplications wrap.

/// SplitMix64 increment, used here as a domain-separation constant.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 finalizer (bijective avalanche on `u64`).
#[inline]
pub fn splitmix64_finalize(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Derives an independent sub-seed from a parent seed and a stream tag.
#[inline]
pub fn mix64(parent: u64, tag: u64) -> u64 {
    splitmix64_finalize(parent ^ splitmix64_finalize(tag ^ GOLDEN_GAMMA))
}
