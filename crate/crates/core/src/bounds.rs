//! Closed-form evaluation of the concentration machinery: expected-value
//! ceilings, Lipschitz constants, ε-net parameters, and the tail
//! probability bounds for both the noiseless and the noisy functional.
//!
//! Net sizes and tail prefactors overflow `f64` at modest `N`, so every
//! potentially huge quantity is computed in natural-log space and reported
//! as log10; the direct value saturates at `f64::MAX`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `9 pi^3`, the constant in the spherical concentration tail.
pub const NINE_PI_CUBED: f64 = 279.0564901226984;

/// Choice of the slack parameter δ in a tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaChoice {
    /// Use this δ as given.
    Explicit(f64),
    /// Minimize the bound over feasible δ by golden-section search.
    Auto,
}

/// Inputs of a tail-bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub d: usize,
    pub n_sites: usize,
    /// Violation threshold `v`.
    pub v: f64,
    pub delta: DeltaChoice,
    /// Noise strength; only the noisy bound depends on it.
    pub lambda: f64,
}

/// Evaluated closed-form quantities for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Expected-value ceiling `c_{d,N}`.
    pub c_dn: f64,
    /// Noise base `chi = (lambda + (1-lambda) sqrt(2))^2`.
    pub chi: f64,
    /// Net resolution `epsilon = delta / (d^2 N 2^(N+1))`.
    pub epsilon: f64,
    /// log10 of the exact net size `(M+2)^(2 d^2 N)`.
    pub net_size_log10: f64,
    /// log10 of the net-size bound `(1/epsilon + 2)^(2 d^2 N)`.
    pub net_bound_log10: f64,
    /// State Lipschitz constant `2^((N+1)/2)`.
    pub lipschitz_state: f64,
    /// Settings variation factor `N 2^N`.
    pub lipschitz_settings_factor: f64,
    /// Noisy state Lipschitz constant `sqrt(2) (lambda + (1-lambda) sqrt(2))^N`.
    pub lipschitz_noisy: f64,
    /// The tail bound itself, saturating at `f64::MAX` when it overflows.
    pub tail_bound: f64,
    /// log10 of the tail bound (always finite; authoritative).
    pub tail_bound_log10: f64,
    /// The δ the bound was evaluated at.
    pub delta_used: f64,
}

/// ε-net parameters for the measurement hypercube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub epsilon: f64,
    /// Largest integer strictly below `1/epsilon`.
    pub m: u64,
    /// log10 of the exact net size `(M+2)^(2 d^2 N)`.
    pub net_size_log10: f64,
    /// log10 of the bound `(1/epsilon + 2)^(2 d^2 N)`.
    pub net_bound_log10: f64,
}

/// The expected-value ceiling `c_{d,N} = (2/d)^(N/2) + (d-2)/d`.
///
/// Equals 1 for qubits at every `N`; strictly decreasing toward
/// `(d-2)/d` for `d >= 3`.
pub fn c_dn(d: usize, n_sites: usize) -> f64 {
    (2.0 / d as f64).sqrt().powi(n_sites as i32) + (d as f64 - 2.0) / d as f64
}

/// The spherical concentration tail
/// `2 exp(-(n+1) eps^2 / (9 pi^3 lambda^2))` for a Lipschitz function on
/// the sphere `S_n`.
pub fn levy_tail(sphere_dim_n: u64, epsilon: f64, lipschitz: f64) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon,
        });
    }
    if lipschitz <= 0.0 {
        return Err(Error::NonPositive {
            name: "lipschitz",
            value: lipschitz,
        });
    }
    let n1 = (sphere_dim_n + 1) as f64;
    Ok(2.0 * (-n1 * epsilon * epsilon / (NINE_PI_CUBED * lipschitz * lipschitz)).exp())
}

/// Net resolution and size for slack `delta`:
/// `epsilon = delta / (d^2 N 2^(N+1))`, `M` the largest integer below
/// `1/epsilon`, exact size `(M+2)^(2 d^2 N)` and its `(1/eps + 2)` bound.
pub fn net_params(d: usize, n_sites: usize, delta: f64) -> Result<NetParams> {
    if delta <= 0.0 {
        return Err(Error::NonPositive {
            name: "delta",
            value: delta,
        });
    }
    let dd = d as f64;
    let n = n_sites as f64;
    let epsilon = delta / (dd * dd * n * 2f64.powi(n_sites as i32 + 1));
    let inv = 1.0 / epsilon;
    let floor = inv.floor();
    let m = if floor == inv { floor - 1.0 } else { floor }.max(0.0) as u64;
    let exponent = 2.0 * dd * dd * n;
    Ok(NetParams {
        epsilon,
        m,
        net_size_log10: exponent * ((m + 2) as f64).log10(),
        net_bound_log10: exponent * (inv + 2.0).log10(),
    })
}

/// `2^(k/2)` without powf rounding for even `k`.
fn pow2_half(k: i32) -> f64 {
    if k % 2 == 0 {
        2f64.powi(k / 2)
    } else {
        2f64.powi((k - 1) / 2) * std::f64::consts::SQRT_2
    }
}

/// The three Lipschitz-type constants: state `2^((N+1)/2)`, settings
/// factor `N 2^N`, and noisy state `sqrt(2) (lambda + (1-lambda) sqrt(2))^N`.
pub fn lipschitz_constants(n_sites: usize, lambda: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidNoiseLevel { lambda });
    }
    let n = n_sites as i32;
    let state = pow2_half(n + 1);
    let settings_factor = n_sites as f64 * 2f64.powi(n);
    let noisy = std::f64::consts::SQRT_2
        * (lambda + (1.0 - lambda) * std::f64::consts::SQRT_2).powi(n);
    Ok((state, settings_factor, noisy))
}

/// The noise base `chi = (lambda + (1-lambda) sqrt(2))^2`, decreasing from
/// 2 at `lambda = 0` to 1 at `lambda = 1`.
pub fn chi(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidNoiseLevel { lambda });
    }
    let base = lambda + (1.0 - lambda) * std::f64::consts::SQRT_2;
    Ok(base * base)
}

/// Bounds on the expected functional for fixed non-dull settings:
/// `E[Q_NL] < c_{d,N}` and `E[Q_NL^lambda] <= 1`.
pub fn expected_value_bounds(d: usize, n_sites: usize) -> (f64, f64) {
    (c_dn(d, n_sites), 1.0)
}

/// Tail bound on `P(sup_Q Q_NL > v)` for Haar-random states:
/// `2 (N 2^(N+1) d^2 / delta + 2)^(2 d^2 N)
///    exp(-(v - delta - c_{d,N})^2 (d/2)^N / (9 pi^3))`.
pub fn theorem1_bound(q: &BoundQuery) -> Result<BoundReport> {
    validate_common(q)?;
    let c = c_dn(q.d, q.n_sites);
    let ln_bound = |delta: f64| ln_tail_noiseless(q.d, q.n_sites, q.v, c, delta);
    let delta_used = resolve_delta(q, c, "c_dn", ln_bound)?;
    build_report(q, c, delta_used, ln_bound(delta_used))
}

/// Tail bound on `P(sup_Q Q_NL^lambda > v)` for Haar-random qubit states:
/// `2 (N 2^(N+3) / delta + 2)^(8N)
///    exp(-(v - delta - 1)^2 (2/chi)^N / (9 pi^3))`.
pub fn theorem2_bound(q: &BoundQuery) -> Result<BoundReport> {
    validate_common(q)?;
    if q.d != 2 {
        return Err(Error::NoiseRequiresQubits { d: q.d });
    }
    let chi_val = chi(q.lambda)?;
    let ln_bound = |delta: f64| ln_tail_noisy(q.n_sites, q.v, chi_val, delta);
    let delta_used = resolve_delta(q, 1.0, "1", ln_bound)?;
    build_report(q, 1.0, delta_used, ln_bound(delta_used))
}

fn validate_common(q: &BoundQuery) -> Result<()> {
    if q.d < 2 || q.n_sites < 2 {
        return Err(Error::InvalidConfig {
            reason: format!(
                "bound queries need d >= 2 and n_sites >= 2, got d={}, n_sites={}",
                q.d, q.n_sites
            ),
        });
    }
    if !(0.0..=1.0).contains(&q.lambda) {
        return Err(Error::InvalidNoiseLevel { lambda: q.lambda });
    }
    Ok(())
}

fn ln_tail_noiseless(d: usize, n_sites: usize, v: f64, c: f64, delta: f64) -> f64 {
    let dd = d as f64;
    let n = n_sites as f64;
    let prefactor_arg = n * 2f64.powi(n_sites as i32 + 1) * dd * dd / delta + 2.0;
    let margin = v - delta - c;
    std::f64::consts::LN_2 + 2.0 * dd * dd * n * prefactor_arg.ln()
        - margin * margin * (dd / 2.0).powi(n_sites as i32) / NINE_PI_CUBED
}

fn ln_tail_noisy(n_sites: usize, v: f64, chi_val: f64, delta: f64) -> f64 {
    let n = n_sites as f64;
    let prefactor_arg = n * 2f64.powi(n_sites as i32 + 3) / delta + 2.0;
    let margin = v - delta - 1.0;
    std::f64::consts::LN_2 + 8.0 * n * prefactor_arg.ln()
        - margin * margin * (2.0 / chi_val).powi(n_sites as i32) / NINE_PI_CUBED
}

/// Validates the feasibility constraint `v > threshold + delta` and, for
/// [`DeltaChoice::Auto`], minimizes the log bound over the open interval
/// `(0, v - threshold)` by golden-section search to 1e-6 relative width.
fn resolve_delta<F: Fn(f64) -> f64>(
    q: &BoundQuery,
    threshold: f64,
    threshold_name: &str,
    ln_bound: F,
) -> Result<f64> {
    match q.delta {
        DeltaChoice::Explicit(delta) => {
            if delta <= 0.0 {
                return Err(Error::NonPositive {
                    name: "delta",
                    value: delta,
                });
            }
            if q.v <= threshold + delta {
                return Err(Error::InfeasibleBound {
                    constraint: format!(
                        "require v > {threshold_name} + delta: v = {}, {threshold_name} = {threshold}, delta = {delta}",
                        q.v
                    ),
                });
            }
            Ok(delta)
        }
        DeltaChoice::Auto => {
            let width = q.v - threshold;
            if width <= 0.0 {
                return Err(Error::InfeasibleBound {
                    constraint: format!(
                        "require v > {threshold_name} for a feasible delta: v = {}, {threshold_name} = {threshold}",
                        q.v
                    ),
                });
            }
            Ok(golden_section_min(&ln_bound, width * 1e-9, width * (1.0 - 1e-9), width * 1e-6))
        }
    }
}

/// Golden-section minimization on `[a, b]` to absolute width `tol`,
/// returning the best of the probe points (robust when the minimum sits
/// on the boundary).
fn golden_section_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    [a, x1, 0.5 * (a + b), x2, b]
        .into_iter()
        .min_by(|x, y| f(*x).partial_cmp(&f(*y)).unwrap())
        .unwrap()
}

fn build_report(q: &BoundQuery, c: f64, delta_used: f64, ln_bound: f64) -> Result<BoundReport> {
    let net = net_params(q.d, q.n_sites, delta_used)?;
    let (lip_state, lip_settings, lip_noisy) = lipschitz_constants(q.n_sites, q.lambda)?;
    let log10_bound = ln_bound / std::f64::consts::LN_10;
    let tail_bound = if log10_bound > f64::MAX.log10() {
        f64::MAX
    } else {
        10f64.powf(log10_bound)
    };
    Ok(BoundReport {
        c_dn: c,
        chi: chi(q.lambda)?,
        epsilon: net.epsilon,
        net_size_log10: net.net_size_log10,
        net_bound_log10: net.net_bound_log10,
        lipschitz_state: lip_state,
        lipschitz_settings_factor: lip_settings,
        lipschitz_noisy: lip_noisy,
        tail_bound,
        tail_bound_log10: log10_bound,
        delta_used,
    })
}
