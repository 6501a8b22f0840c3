//! Log-factorials and exponentially scaled modified Bessel functions.

use std::f64::consts::PI;

/// Below this argument the Bessel functions use their power series, above
/// it the scaled asymptotic expansion.
const BESSEL_SERIES_LIMIT: f64 = 15.0;

/// `ln(m!)`.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 256 {
        (2..=m).map(|k| (k as f64).ln()).sum()
    } else {
        // Stirling series; the first omitted term is below 1e-17 for m >= 256.
        let x = m as f64;
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        x * x.ln() - x
            + 0.5 * (2.0 * PI * x).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
    }
}

/// `ln C(m, k)`.
pub fn ln_binomial(m: u64, k: u64) -> f64 {
    debug_assert!(k <= m);
    ln_factorial(m) - ln_factorial(k) - ln_factorial(m - k)
}

/// Exponentially scaled `I₀(x)·e^{−|x|}`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x < BESSEL_SERIES_LIMIT {
        // Σ (x²/4)^k / (k!)²
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        scaled_asymptotic(0.0, x)
    }
}

/// Exponentially scaled `I₁(x)·e^{−|x|}` (odd in `x`).
pub fn bessel_i1e(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax < BESSEL_SERIES_LIMIT {
        // Σ (x/2)^{2k+1} / (k!(k+1)!)
        let half = 0.5 * ax;
        let q = half * half;
        let mut term = half;
        let mut sum = half;
        let mut k = 1.0;
        loop {
            term *= q / (k * (k + 1.0));
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        sum * (-ax).exp()
    } else {
        scaled_asymptotic(1.0, ax)
    };
    value.copysign(x)
}

/// `I₀(x)`; overflows for `x` above ~700.
pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0e(x) * x.abs().exp()
}

/// Hankel expansion `e^{−x} I_ν(x) ≈ (2πx)^{−1/2} Σ (−1)^k a_k(ν) / x^k`,
/// summed until the terms stop decreasing.
fn scaled_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= prev || term.abs() < 1e-17 * sum.abs() {
            break;
        }
        sum += term;
        prev = term.abs();
    }
    sum / (2.0 * PI * x).sqrt()
}
