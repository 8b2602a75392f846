//! Cross-checks of the streaming kernels against independent dense-matrix
//! oracles, and of the see-saw references against brute-force grids.

use fullcorr_core::belleval::{
    linear_value, noisy_density, qnl, qnl_density, qnl_noisy, NoiseLevel, SignFunction,
};
use fullcorr_core::optimize::horodecki_chsh;
use fullcorr_core::qcore::{
    expectation_table, ghz_state, haar_state, product_expectation, sample_settings,
    BOperatorTable, MeasurementSettings, PureState, SettingIndex,
};
use fullcorr_core::Complex64;
use nalgebra::DMatrix;

/// Dense oracle: materialize the full tensor product and contract.
fn dense_expectation(state: &PureState, settings: &MeasurementSettings, ix: usize) -> f64 {
    let n = settings.n_sites();
    let table = BOperatorTable::from_settings(settings);
    let mut op = DMatrix::<Complex64>::identity(1, 1);
    for site in 0..n {
        let bit = ((ix >> (n - 1 - site)) & 1) as u8;
        op = op.kronecker(table.op(site, bit));
    }
    let psi = state.amplitudes();
    let mut value = Complex64::ZERO;
    for row in 0..psi.len() {
        let mut acc = Complex64::ZERO;
        for col in 0..psi.len() {
            acc += op[(row, col)] * psi[col];
        }
        value += psi[row].conj() * acc;
    }
    value.re
}

#[test]
fn streaming_kernel_matches_dense_oracle() {
    for n in 2..=4usize {
        for seed in 0..5u64 {
            let psi = haar_state(2, n, 100 + seed).unwrap();
            let settings = sample_settings(2, n, 200 + seed, false).unwrap();
            for ix in 0..1usize << n {
                let fast = product_expectation(&psi, &settings, &SettingIndex::from_index(ix, n))
                    .unwrap();
                let dense = dense_expectation(&psi, &settings, ix);
                assert!(
                    (fast - dense).abs() < 1e-10,
                    "n={n} seed={seed} X={ix}: {fast} vs {dense}"
                );
            }
        }
    }
    // Qutrits too.
    let psi = haar_state(3, 2, 300).unwrap();
    let settings = sample_settings(3, 2, 301, false).unwrap();
    for ix in 0..4usize {
        let fast = product_expectation(&psi, &settings, &SettingIndex::from_index(ix, 2)).unwrap();
        let dense = dense_expectation(&psi, &settings, ix);
        assert!((fast - dense).abs() < 1e-10);
    }
}

#[test]
fn qnl_is_the_envelope_over_sign_functions() {
    // Exhaustive over all 2^(2^N) sign functions at N = 3 and N = 4.
    for (n, seeds) in [(3usize, 3u64), (4, 1)] {
        for seed in 0..seeds {
            let psi = haar_state(2, n, 400 + seed).unwrap();
            let settings = sample_settings(2, n, 500 + seed, false).unwrap();
            let table = BOperatorTable::from_settings(&settings);
            let expectations = expectation_table(&psi, &table).unwrap();
            let q = qnl(&psi, &settings).unwrap();

            let mut max_linear = f64::NEG_INFINITY;
            for code in 0..1u64 << (1 << n) {
                let value: f64 = expectations
                    .iter()
                    .enumerate()
                    .map(|(ix, e)| if code >> ix & 1 == 0 { *e } else { -*e })
                    .sum();
                max_linear = max_linear.max(value);
            }
            assert!(
                (max_linear - q).abs() < 1e-11,
                "n={n} seed={seed}: envelope {max_linear} vs qnl {q}"
            );

            // The pointwise-sign table realizes the maximum, and the public
            // linear_value path agrees on sampled tables.
            let s = SignFunction::from_expectations(&expectations).unwrap();
            let lin = linear_value(&psi, &settings, &s).unwrap();
            assert!((lin - q).abs() < 1e-11);
            for k in 0..50u64 {
                let code = fullcorr_core::seeding::mix64(600 + seed, k);
                let signs: Vec<i8> = (0..1usize << n)
                    .map(|ix| if code >> (ix % 64) & 1 == 0 { 1 } else { -1 })
                    .collect();
                let s = SignFunction::new(n, signs).unwrap();
                let lin = linear_value(&psi, &settings, &s).unwrap();
                assert!(lin <= q + 1e-11);
                assert!(lin.abs() <= q + 1e-11);
            }
        }
    }
}

#[test]
fn dual_channel_matches_density_oracle() {
    for n in 2..=4usize {
        for seed in 0..3u64 {
            let psi = haar_state(2, n, 700 + seed).unwrap();
            let settings = sample_settings(2, n, 800 + seed, false).unwrap();
            for lambda in [0.1, 0.5, 0.9] {
                let noise = NoiseLevel::new(lambda).unwrap();
                let fast = qnl_noisy(&psi, &settings, noise).unwrap();
                let rho = noisy_density(&psi, noise).unwrap();
                let dense = qnl_density(&rho, &settings).unwrap();
                assert!(
                    (fast - dense).abs() < 1e-10,
                    "n={n} seed={seed} lambda={lambda}: {fast} vs {dense}"
                );
            }
        }
    }
}

/// Restricted planar brute force for two qubits: grid the first party's
/// observables over Bloch angles and maximize the second party's
/// analytically. A lower bound on the Horodecki value by construction.
fn planar_grid_chsh(t: &nalgebra::Matrix3<f64>, steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let unit = |theta: f64| nalgebra::Vector3::new(theta.sin(), 0.0, theta.cos());
    for i in 0..steps {
        let u0 = unit(std::f64::consts::PI * i as f64 / steps as f64);
        for j in 0..steps {
            let u1 = unit(std::f64::consts::PI * j as f64 / steps as f64);
            let w0 = (u0 + u1) * 0.5;
            let w1 = (u0 - u1) * 0.5;
            let p0 = t.transpose() * w0;
            let p1 = t.transpose() * w1;
            for s in 0..16u8 {
                let sgn = |bit: u8| if s >> bit & 1 == 0 { 1.0 } else { -1.0 };
                let a = p0 * sgn(0) + p1 * sgn(1);
                let b = p0 * sgn(2) + p1 * sgn(3);
                let value = 0.5 * ((a + b).norm() + (a - b).norm());
                best = best.max(value);
            }
        }
    }
    best
}

#[test]
fn horodecki_matches_planar_grid() {
    for beta in [0.2f64, 0.4, std::f64::consts::FRAC_1_SQRT_2] {
        let alpha = (1.0 - beta * beta).sqrt();
        let psi = ghz_state(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0), 2).unwrap();
        let exact = horodecki_chsh(&psi).unwrap();
        // T = diag(2ab, -2ab, 1) for this family; the optimum is planar.
        let t = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(
            2.0 * alpha * beta,
            -2.0 * alpha * beta,
            1.0,
        ));
        let grid = planar_grid_chsh(&t, 720);
        assert!(grid <= exact + 1e-9, "grid {grid} above exact {exact}");
        assert!(
            exact - grid < 1e-4,
            "beta={beta}: grid {grid} too far below exact {exact}"
        );
    }
}

#[test]
fn haar_quartic_moment_two_qubits() {
    // E|a_I|^4 = 2 / (D (D+1)) = 0.1 at D = 4, within 3 SE over 1e5 draws.
    let draws = 100_000u64;
    let mut samples = Vec::with_capacity(draws as usize);
    for i in 0..draws {
        let psi = haar_state(2, 2, fullcorr_core::seeding::mix64(0x22, i)).unwrap();
        let s4: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr().powi(2)).sum();
        samples.push(s4 / 4.0);
    }
    let m = draws as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    assert!(
        (mean - 0.1).abs() <= 3.0 * se,
        "mean {mean} is {} SE from 0.1",
        (mean - 0.1).abs() / se
    );
}

#[test]
fn qnl_respects_the_operator_norm_ceiling() {
    for n in 2..=5usize {
        let ceiling = 2f64.powf((n as f64 - 1.0) / 2.0);
        for seed in 0..10u64 {
            let psi = haar_state(2, n, 900 + seed).unwrap();
            let settings = sample_settings(2, n, 1000 + seed, false).unwrap();
            let q = qnl(&psi, &settings).unwrap();
            assert!(q <= ceiling + 1e-9);
            let qn = qnl_noisy(&psi, &settings, NoiseLevel::new(0.3).unwrap()).unwrap();
            assert!(qn <= ceiling + 1e-9);
            assert!(qn >= 0.0);
        }
    }
}

#[test]
fn lipschitz_bounds_hold_on_random_pairs() {
    let n = 3usize;
    let (lip_state, lip_settings, _) =
        fullcorr_core::bounds::lipschitz_constants(n, 0.0).unwrap();
    for seed in 0..50u64 {
        let settings = sample_settings(2, n, 1100 + seed, false).unwrap();
        let psi = haar_state(2, n, 1200 + seed).unwrap();
        let phi = haar_state(2, n, 1300 + seed).unwrap();
        let dq = (qnl(&psi, &settings).unwrap() - qnl(&phi, &settings).unwrap()).abs();
        assert!(dq <= lip_state * psi.distance(&phi).unwrap() + 1e-9);

        let other = sample_settings(2, n, 1400 + seed, false).unwrap();
        let dq = (qnl(&psi, &settings).unwrap() - qnl(&psi, &other).unwrap()).abs();
        let dist = fullcorr_core::qcore::settings_distance(&settings, &other).unwrap();
        assert!(dq <= lip_settings * dist + 1e-9);
    }
    for lambda in [0.3, 0.7] {
        let noise = NoiseLevel::new(lambda).unwrap();
        let (_, _, lip_noisy) = fullcorr_core::bounds::lipschitz_constants(n, lambda).unwrap();
        for seed in 0..25u64 {
            let settings = sample_settings(2, n, 1500 + seed, false).unwrap();
            let psi = haar_state(2, n, 1600 + seed).unwrap();
            let phi = haar_state(2, n, 1700 + seed).unwrap();
            let dq = (qnl_noisy(&psi, &settings, noise).unwrap()
                - qnl_noisy(&phi, &settings, noise).unwrap())
            .abs();
            assert!(dq <= lip_noisy * psi.distance(&phi).unwrap() + 1e-9);
        }
    }
}
