//! Property tests for the structural invariants.

use fullcorr_core::belleval::{linear_value, qnl, SignFunction};
use fullcorr_core::optimize::msign;
use fullcorr_core::qcore::{
    b_operator, haar_state, random_hermitian, sample_settings, settings_distance,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn haar_states_are_unit_vectors(seed in any::<u64>(), d in 2usize..4, n in 1usize..4) {
        let psi = haar_state(d, n, seed).unwrap();
        let norm_sqr: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm_sqr - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn trace_identities_hold_for_sampled_pairs(seed in any::<u64>(), d in 2usize..5) {
        let settings = sample_settings(d, 1, seed, false).unwrap();
        let pair = settings.pair(0);
        let b0 = b_operator(pair, 0);
        let b1 = b_operator(pair, 1);
        let tr_sq = |b: &fullcorr_core::qcore::ObservableMatrix| {
            (b.entries() * b.entries()).trace().re
        };
        // Tr B0^2 + Tr B1^2 = d, and |Tr B0| + |Tr B1| <= d.
        prop_assert!((tr_sq(&b0) + tr_sq(&b1) - d as f64).abs() <= 1e-10);
        prop_assert!(b0.trace().abs() + b1.trace().abs() <= d as f64 + 1e-10);
        // Half-sum operators stay inside the unit ball.
        prop_assert!(b0.operator_norm() <= 1.0 + 1e-12);
        prop_assert!(b1.operator_norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn msign_maximizes_over_sampled_involutions(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(d, &mut rng);
        let best = msign(&h).unwrap();
        prop_assert!(best.involution_deviation() <= 1e-10);
        let optimum = (best.entries() * &h).trace().re;
        // The optimum equals the trace norm of h ...
        let trace_norm: f64 = nalgebra::SymmetricEigen::new(h.clone())
            .eigenvalues
            .iter()
            .map(|mu| mu.abs())
            .sum();
        prop_assert!((optimum - trace_norm).abs() <= 1e-9);
        // ... and dominates any other sampled involution.
        let rival = sample_settings(d, 1, seed ^ 0xABCD, false).unwrap();
        let value = (rival.pair(0).a0().entries() * &h).trace().re;
        prop_assert!(value <= optimum + 1e-9);
    }

    #[test]
    fn settings_distance_is_a_symmetric_premetric(
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
        d in 2usize..4,
        n in 1usize..4,
    ) {
        let q = sample_settings(d, n, seed_a, false).unwrap();
        let q2 = sample_settings(d, n, seed_b, false).unwrap();
        let ab = settings_distance(&q, &q2).unwrap();
        let ba = settings_distance(&q2, &q).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert_eq!(settings_distance(&q, &q).unwrap(), 0.0);
        // Involutions live in the unit ball, so the distance caps at 2.
        prop_assert!(ab <= 2.0 + 1e-10);
    }

    #[test]
    fn linear_values_never_exceed_the_envelope(
        state_seed in any::<u64>(),
        settings_seed in any::<u64>(),
        sign_bits in any::<u64>(),
    ) {
        let n = 3usize;
        let psi = haar_state(2, n, state_seed).unwrap();
        let settings = sample_settings(2, n, settings_seed, false).unwrap();
        let signs: Vec<i8> = (0..1usize << n)
            .map(|ix| if sign_bits >> ix & 1 == 0 { 1 } else { -1 })
            .collect();
        let s = SignFunction::new(n, signs).unwrap();
        let lin = linear_value(&psi, &settings, &s).unwrap();
        let q = qnl(&psi, &settings).unwrap();
        prop_assert!(lin.abs() <= q + 1e-11);
    }
}
