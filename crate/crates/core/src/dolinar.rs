//! The classic Dolinar receiver for `|±α⟩` with known amplitude.
//!
//! The receiver displaces the input by `γ₊(t) = −γ₋(t)` and photon-counts;
//! each click flips the running hypothesis. With the optimal displacement
//! the success probability obeys a closed-form trajectory that reaches the
//! Helstrom value at `t = 1`.
//!
//! Also here: the same receiver calibrated on a wrong amplitude `β`, and
//! the Estimate&Discriminate average over heterodyne estimates of `β`.

use serde::{Deserialize, Serialize};

use crate::bounds::helstrom_error_symmetric;
use crate::error::{invalid, Error, Result};
use crate::numerics::ode::rk4_sqrt_time;
use crate::numerics::quadrature::{gauss_hermite, integrate, Tolerance};
use crate::numerics::special::bessel_i1e;
use crate::optics::{check_priors, check_probability, ComplexAmplitude};

/// Start of the numerical integration when the flat-prior equation is
/// singular at `t = 0`; the closed form supplies the state there.
pub const BOOTSTRAP_TIME: f64 = 1e-6;

/// Minimum number of solver steps accepted by the ODE drivers.
pub const MIN_GRID_STEPS: usize = 100;

/// Photodetection rates while the running hypothesis is right (`λ`) or
/// wrong (`μ`), per unit time with the pulse normalised to `T = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DolinarRates {
    pub lambda_t: f64,
    pub mu_t: f64,
}

impl DolinarRates {
    pub fn total(&self) -> f64 {
        self.lambda_t + self.mu_t
    }

    pub fn max(&self) -> f64 {
        self.lambda_t.max(self.mu_t)
    }

    /// `dP_c/dt = μ − (λ + μ)P_c`.
    pub fn success_derivative(&self, pc: f64) -> f64 {
        self.mu_t - self.total() * pc
    }
}

/// Success-probability samples from one of the ODE drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    /// Strictly increasing, from 0 to 1.
    pub times: Vec<f64>,
    pub pc: Vec<f64>,
    pub solver_steps: usize,
    /// Largest violation of the solver's independent check: distance to the
    /// closed form, implicit-relation residual, or a step-doubling estimate,
    /// depending on the driver.
    pub max_residual: f64,
}

impl OdeSolution {
    pub fn terminal(&self) -> f64 {
        *self.pc.last().expect("solution has samples")
    }

    pub fn terminal_error(&self) -> f64 {
        1.0 - self.terminal()
    }

    /// Linear interpolation of `P_c` at time `t`.
    pub fn at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&x| x < t);
        if idx == 0 {
            return self.pc[0];
        }
        if idx >= self.times.len() {
            return self.terminal();
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        self.pc[idx - 1] * (1.0 - w) + self.pc[idx] * w
    }
}

/// `½(1 + √(1 − 4p₊p₋ e^{−4|α|²t}))`.
pub fn dolinar_success(p_plus: f64, p_minus: f64, alpha_abs_sq: f64, t: f64) -> Result<f64> {
    check_priors(p_plus, p_minus)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("time {t} outside [0, 1]")));
    }
    Ok(dolinar_success_unchecked(p_plus, alpha_abs_sq, t))
}

fn dolinar_success_unchecked(p_plus: f64, alpha_abs_sq: f64, t: f64) -> f64 {
    let p_minus = 1.0 - p_plus;
    0.5 * (1.0 + (1.0 - 4.0 * p_plus * p_minus * (-4.0 * alpha_abs_sq * t).exp()).max(0.0).sqrt())
}

/// Optimal displacement `γ₊ = α/(2P_c − 1)` given the current success
/// probability.
pub fn optimal_displacement(alpha: ComplexAmplitude, pc: f64) -> ComplexAmplitude {
    alpha.scale(1.0 / (2.0 * pc - 1.0))
}

/// Rates for hypothesis `+` with displacement `γ₊ = γ`, `γ₋ = −γ`:
/// `λ = |α − γ|²`, `μ = |α + γ|²`.
pub fn dolinar_rates(alpha: ComplexAmplitude, gamma: ComplexAmplitude) -> DolinarRates {
    DolinarRates { lambda_t: (alpha - gamma).abs_sq(), mu_t: (alpha + gamma).abs_sq() }
}

/// Rates along the optimal trajectory, `|α|²(1 ∓ 1/(2P_c − 1))²`.
///
/// `2P_c − 1` is formed with `expm1` so it stays accurate for tiny `t`; at
/// `t = 0` with flat priors both rates are infinite.
pub fn optimal_rates(p_plus: f64, alpha: ComplexAmplitude, t: f64) -> DolinarRates {
    let a = alpha.abs_sq();
    let pq = p_plus * (1.0 - p_plus);
    let skew = 2.0 * p_plus - 1.0;
    let d = (skew * skew - 4.0 * pq * (-4.0 * a * t).exp_m1()).sqrt();
    let k = 1.0 / d;
    DolinarRates { lambda_t: a * (1.0 - k) * (1.0 - k), mu_t: a * (1.0 + k) * (1.0 + k) }
}

/// Integrates the optimally controlled equation
/// `dP_c/dt = |α|²(1 − 2P_c − 1/(1 − 2P_c))` from `P_c(0) = max(p₊, p₋)`.
///
/// Near `P_c = ½` the right-hand side is singular; the trajectory is then
/// started from the closed form at [`BOOTSTRAP_TIME`]. `max_residual` is the
/// largest distance to the closed form.
pub fn dolinar_ode_solve(p_plus: f64, alpha_abs_sq: f64, grid_steps: usize) -> Result<OdeSolution> {
    check_probability(p_plus, "p_plus")?;
    if grid_steps < MIN_GRID_STEPS {
        return Err(invalid(format!("grid_steps = {grid_steps} below {MIN_GRID_STEPS}")));
    }
    if !(alpha_abs_sq >= 0.0 && alpha_abs_sq.is_finite()) {
        return Err(invalid(format!("|alpha|^2 = {alpha_abs_sq} must be finite and >= 0")));
    }
    let p0 = p_plus.max(1.0 - p_plus);
    if alpha_abs_sq == 0.0 || p0 == 1.0 {
        let times: Vec<f64> = (0..=grid_steps).map(|i| (i as f64 / grid_steps as f64).powi(2)).collect();
        let pc = vec![p0; times.len()];
        return Ok(OdeSolution { times, pc, solver_steps: grid_steps, max_residual: 0.0 });
    }

    let rhs = |_t: f64, y: &[f64; 1]| {
        let d = 1.0 - 2.0 * y[0];
        [alpha_abs_sq * (d - 1.0 / d)]
    };
    let bootstrap = p0 - 0.5 < 1e-3;
    let (t_start, y_start) = if bootstrap {
        (BOOTSTRAP_TIME, dolinar_success_unchecked(p_plus, alpha_abs_sq, BOOTSTRAP_TIME))
    } else {
        (0.0, p0)
    };
    let tr = rk4_sqrt_time(rhs, t_start, 1.0, [y_start], grid_steps, true);

    let mut times = Vec::with_capacity(tr.times.len() + 1);
    let mut pc = Vec::with_capacity(tr.times.len() + 1);
    if bootstrap {
        times.push(0.0);
        pc.push(p0);
    }
    times.extend_from_slice(&tr.times);
    pc.extend(tr.states.iter().map(|s| s[0]));

    if let Some(i) = pc.iter().position(|p| !p.is_finite()) {
        return Err(Error::Singular { t: times[i], reason: "success probability left (1/2, 1]".into() });
    }
    let max_residual = times
        .iter()
        .zip(&pc)
        .map(|(&t, &p)| (p - dolinar_success_unchecked(p_plus, alpha_abs_sq, t)).abs())
        .fold(0.0, f64::max);
    Ok(OdeSolution { times, pc, solver_steps: grid_steps, max_residual })
}

/// Success probability of a Dolinar receiver calibrated for `|±β⟩` but fed
/// `|±α⟩` (flat priors):
///
/// `½ + Re(αβ*)(1 − e^{−2(|α|²+|β|²)}) / ((|α|² + |β|²)√(1 − e^{−4|β|²}))`.
///
/// The square root carries the calibration amplitude `β`: it comes from the
/// integrating factor of the displacement `β/(2P_β(t) − 1)`. At `β = α` this
/// is the Helstrom value. `β = 0` gives no information and returns ½.
pub fn miscalibrated_success(beta: ComplexAmplitude, alpha: ComplexAmplitude) -> Result<f64> {
    let a = alpha.abs_sq();
    if a == 0.0 {
        return Err(invalid("miscalibrated success undefined for alpha = 0"));
    }
    let b = beta.abs_sq();
    if b == 0.0 {
        return Ok(0.5);
    }
    let overlap = (alpha.as_complex() * beta.as_complex().conj()).re;
    Ok(0.5 + overlap * miscalibration_gain(a, b))
}

/// `(1 − e^{−2(a+b)}) / ((a+b)√(1 − e^{−4b}))`.
fn miscalibration_gain(a: f64, b: f64) -> f64 {
    -(-2.0 * (a + b)).exp_m1() / ((a + b) * (-(-4.0 * b).exp_m1()).sqrt())
}

/// Numerical counterpart of [`miscalibrated_success`]: propagates
/// `dP_c/dt = μ − (λ + μ)P_c` with the displacement computed from `β`.
///
/// The displacement diverges like `t^{−1/2}` at the start, so integration
/// begins at `t₀ = (1/grid_steps)²` from `P_c = ½`; the neglected initial
/// segment contributes `O(t₀)`. `max_residual` is the distance to the closed
/// form at `t = 1`.
pub fn miscalibrated_propagate(beta: ComplexAmplitude, alpha: ComplexAmplitude, grid_steps: usize) -> Result<OdeSolution> {
    if grid_steps < MIN_GRID_STEPS {
        return Err(invalid(format!("grid_steps = {grid_steps} below {MIN_GRID_STEPS}")));
    }
    let b = beta.abs_sq();
    let t0 = (1.0 / grid_steps as f64).powi(2);
    let rhs = |t: f64, y: &[f64; 1]| {
        let gamma = if b == 0.0 {
            ComplexAmplitude::ZERO
        } else {
            optimal_displacement(beta, dolinar_success_unchecked(0.5, b, t))
        };
        [dolinar_rates(alpha, gamma).success_derivative(y[0])]
    };
    let tr = rk4_sqrt_time(rhs, t0, 1.0, [0.5], grid_steps, true);
    let mut times = vec![0.0];
    let mut pc = vec![0.5];
    times.extend_from_slice(&tr.times);
    pc.extend(tr.states.iter().map(|s| s[0]));
    let closed = if alpha.abs_sq() > 0.0 { miscalibrated_success(beta, alpha)? } else { 0.5 };
    let max_residual = (pc.last().copied().unwrap_or(0.5) - closed).abs();
    Ok(OdeSolution { times, pc, solver_steps: grid_steps, max_residual })
}

/// Estimate&Discriminate with a heterodyne estimate of `α` on `n` copies:
/// `∫ d²β (n/π) e^{−n|α−β|²} P_c(β; α)`.
///
/// The phase integral is done analytically (it produces `I₁`), leaving a
/// smooth radial integral handled by adaptive Gauss–Kronrod. The
/// integrand's direction-dependent limit at `β = 0` is what makes a plain
/// 2-D tensor rule slow to converge; see [`eande_success_hermite`].
pub fn eande_success(alpha: ComplexAmplitude, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(invalid("E&D needs n >= 1 training copies"));
    }
    let a = alpha.abs_sq();
    if a == 0.0 {
        return Ok(0.5);
    }
    let abs_alpha = a.sqrt();
    let nf = f64::from(n);
    let width = 9.0 / nf.sqrt();
    let lo = (abs_alpha - width).max(0.0);
    let hi = abs_alpha + width;
    let integrand = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let b = r * r;
        let d = abs_alpha - r;
        2.0 * nf * abs_alpha * b * (-nf * d * d).exp() * bessel_i1e(2.0 * nf * abs_alpha * r) * miscalibration_gain(a, b)
    };
    let gain = integrate(integrand, lo, hi, Tolerance::absolute(1e-12))?;
    Ok(0.5 + gain.value)
}

/// Outcome of the tensor-product Hermite evaluation of the E&D average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteEstimate {
    pub value: f64,
    /// `|value(2·points) − value(points)|`.
    pub doubling_change: f64,
}

impl HermiteEstimate {
    /// Whether doubling the node count moved the result by at most `1e-8`.
    pub fn is_converged(&self) -> bool {
        self.doubling_change <= 1e-8
    }
}

/// E&D average by a `points × points` Gauss–Hermite rule centred at `α`
/// with scale `1/√n`, plus the change seen when the rule is doubled.
pub fn eande_success_hermite(alpha: ComplexAmplitude, n: u32, points: usize) -> Result<HermiteEstimate> {
    if n == 0 || points == 0 {
        return Err(invalid("E&D Hermite rule needs n >= 1 and points >= 1"));
    }
    if alpha.abs_sq() == 0.0 {
        return Ok(HermiteEstimate { value: 0.5, doubling_change: 0.0 });
    }
    let value = hermite_tensor(alpha, n, points)?;
    let doubled = hermite_tensor(alpha, n, 2 * points)?;
    Ok(HermiteEstimate { value, doubling_change: (doubled - value).abs() })
}

fn hermite_tensor(alpha: ComplexAmplitude, n: u32, points: usize) -> Result<f64> {
    let (x, w) = gauss_hermite(points);
    let scale = 1.0 / f64::from(n).sqrt();
    let mut total = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            let beta = alpha + ComplexAmplitude::new(xi * scale, yj * scale);
            total += wi * wj * miscalibrated_success(beta, alpha)?;
        }
    }
    Ok(total / std::f64::consts::PI)
}

/// Flat-prior Helstrom success for `|±α⟩`, the `t = 1` value of the optimal
/// receiver.
pub fn helstrom_success_symmetric(alpha_abs_sq: f64) -> f64 {
    1.0 - helstrom_error_symmetric(alpha_abs_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::helstrom_success;
    use proptest::prelude::*;

    fn a(x: f64) -> ComplexAmplitude {
        ComplexAmplitude::real(x)
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(dolinar_success(0.5, 0.5, 0.3, 0.0).unwrap(), 0.5);
        let h = helstrom_success(0.5, 0.5, a(0.25), a(-0.25)).unwrap();
        assert!((dolinar_success(0.5, 0.5, 0.0625, 1.0).unwrap() - h).abs() < 1e-15);
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(dolinar_success(1.0, 0.0, 0.2, t).unwrap(), 1.0);
        }
        assert!(dolinar_success(0.5, 0.5, 0.1, 1.5).is_err());
    }

    #[test]
    fn ode_matches_closed_form() {
        let sol = dolinar_ode_solve(0.5, 0.390625, 10_000).unwrap();
        let expected = 0.5 * (1.0 + (1.0 - (-1.5625f64).exp()).sqrt());
        assert!((sol.terminal() - expected).abs() < 1e-6);
        assert!(sol.max_residual < 1e-6);
        assert_eq!(sol.times[0], 0.0);
        assert_eq!(*sol.times.last().unwrap(), 1.0);
        assert!(sol.pc.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn ode_with_unequal_priors_starts_at_max_prior() {
        let sol = dolinar_ode_solve(0.3, 0.25, 2000).unwrap();
        assert_eq!(sol.pc[0], 0.7);
        let expected = dolinar_success(0.3, 0.7, 0.25, 1.0).unwrap();
        assert!((sol.terminal() - expected).abs() < 1e-9);
    }

    #[test]
    fn ode_zero_amplitude_is_constant() {
        let sol = dolinar_ode_solve(0.6, 0.0, 100).unwrap();
        assert!(sol.pc.iter().all(|&p| p == 0.6));
        assert!(dolinar_ode_solve(0.5, 0.1, 99).is_err());
    }

    #[test]
    fn ode_richardson_fourth_order() {
        let exact = dolinar_success(0.5, 0.5, 1.0, 1.0).unwrap();
        let e1 = (dolinar_ode_solve(0.5, 1.0, 100).unwrap().terminal() - exact).abs();
        let e2 = (dolinar_ode_solve(0.5, 1.0, 200).unwrap().terminal() - exact).abs();
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn optimal_rates_reproduce_the_optimal_equation() {
        let alpha = a(0.8);
        for t in [0.05, 0.3, 0.9] {
            let pc = dolinar_success(0.5, 0.5, 0.64, t).unwrap();
            let r = optimal_rates(0.5, alpha, t);
            let lhs = r.success_derivative(pc);
            let d = 1.0 - 2.0 * pc;
            assert!((lhs - 0.64 * (d - 1.0 / d)).abs() < 1e-12);
        }
    }

    #[test]
    fn miscalibrated_examples() {
        let alpha = ComplexAmplitude::new(0.3, 0.4);
        let h = helstrom_success_symmetric(alpha.abs_sq());
        assert!((miscalibrated_success(alpha, alpha).unwrap() - h).abs() < 1e-15);
        assert!((miscalibrated_success(-alpha, alpha).unwrap() - (1.0 - h)).abs() < 1e-15);
        let ortho = ComplexAmplitude::new(-0.4, 0.3);
        assert!((miscalibrated_success(ortho, alpha).unwrap() - 0.5).abs() < 1e-15);
        assert!(miscalibrated_success(alpha, ComplexAmplitude::ZERO).is_err());
    }

    #[test]
    fn miscalibrated_closed_form_matches_propagation() {
        let alpha = ComplexAmplitude::new(0.5, 0.1);
        for beta in [ComplexAmplitude::new(0.9, -0.3), a(0.1), ComplexAmplitude::new(-0.2, 0.6), alpha] {
            let sol = miscalibrated_propagate(beta, alpha, 4000).unwrap();
            assert!(sol.max_residual < 1e-6, "beta {beta}: {}", sol.max_residual);
        }
    }

    #[test]
    fn eande_limits() {
        assert_eq!(eande_success(ComplexAmplitude::ZERO, 3).unwrap(), 0.5);
        let small = eande_success(a(1e-4), 2).unwrap();
        assert!((small - 0.5).abs() < 1e-3);
        let alpha = a(0.625);
        let big_n = eande_success(alpha, 1_000_000).unwrap();
        assert!((big_n - helstrom_success_symmetric(alpha.abs_sq())).abs() < 1e-4);
    }

    #[test]
    fn eande_is_phase_independent() {
        let v1 = eande_success(a(0.5), 4).unwrap();
        let v2 = eande_success(ComplexAmplitude::from_polar(0.5, 1.1), 4).unwrap();
        assert!((v1 - v2).abs() < 1e-14);
    }

    #[test]
    fn eande_radial_agrees_with_hermite_tensor() {
        for (x, n) in [(0.25, 1u32), (0.625, 4), (1.0, 16)] {
            let radial = eande_success(a(x), n).unwrap();
            let tensor = eande_success_hermite(a(x), n, 96).unwrap();
            assert!((radial - tensor.value).abs() < 5.0 * tensor.doubling_change.max(1e-9), "{x} {n}: {radial} vs {:?}", tensor);
        }
    }

    proptest! {
        #[test]
        fn miscalibrated_never_beats_helstrom(ar in 0.05..1.5f64, br in -2.0..2.0f64, bi in -2.0..2.0f64) {
            let alpha = a(ar);
            let beta = ComplexAmplitude::new(br, bi);
            let p = miscalibrated_success(beta, alpha).unwrap();
            let h = helstrom_success_symmetric(alpha.abs_sq());
            prop_assert!(p <= h + 1e-12);
            prop_assert!(p >= 1.0 - h - 1e-12);
        }
    }
}
