//! The agnostic Dolinar receiver.
//!
//! A beam splitter of reflectivity angle `θ` mixes the signal `|±α⟩` with
//! the concentrated training state `|√n α⟩`, so the phase of `α` never has
//! to be known. Photon counting on one output port gives the rates
//!
//! `λ = |α|²(cos θ − √n sin θ)²`, `μ = |α|²(cos θ + √n sin θ)²`,
//!
//! and with `ξ = P_c − ½` the optimal control solves
//! `dξ/dt = |α|²(√(n + (n−1)²ξ²) − (n+1)ξ)`.

use serde::{Deserialize, Serialize};

use crate::dolinar::{DolinarRates, OdeSolution, MIN_GRID_STEPS};
use crate::error::{invalid, Error, Result};
use crate::numerics::ode::rk4_sqrt_time;
use crate::numerics::roots::bisect;

const QUARTER_PI: f64 = std::f64::consts::FRAC_PI_4;

/// Amplitudes seen by the receiver.
///
/// `alpha_abs_sq_control` drives the reflectivity schedule and
/// `alpha_abs_sq_true` the photodetection rates; they coincide for a
/// calibrated receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgnosticConfig {
    pub n_train: u32,
    pub alpha_abs_sq_true: f64,
    pub alpha_abs_sq_control: f64,
}

impl AgnosticConfig {
    pub fn new(n_train: u32, alpha_abs_sq_true: f64, alpha_abs_sq_control: f64) -> Result<Self> {
        for (v, name) in [(alpha_abs_sq_true, "true"), (alpha_abs_sq_control, "control")] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} |alpha|^2 = {v} must be finite and >= 0")));
            }
        }
        Ok(Self { n_train, alpha_abs_sq_true, alpha_abs_sq_control })
    }

    pub fn calibrated(n_train: u32, alpha_abs_sq: f64) -> Result<Self> {
        Self::new(n_train, alpha_abs_sq, alpha_abs_sq)
    }

    pub fn is_calibrated(&self) -> bool {
        self.alpha_abs_sq_true == self.alpha_abs_sq_control
    }
}

/// Reflectivity angle sampled on a time grid, interpolated linearly in `√t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTrajectory {
    times: Vec<f64>,
    theta: Vec<f64>,
}

impl ControlTrajectory {
    /// Checks that the grid spans `[0, 1]` and increases strictly, that every
    /// angle lies in `[0, π/2]`, and that neighbours differ by at most `π/4`.
    pub fn new(times: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if times.len() != theta.len() || times.len() < 2 {
            return Err(invalid("control needs matching times/theta with at least two samples"));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(invalid("control grid must start at 0 and end at 1"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("control grid must be strictly increasing"));
        }
        if theta.iter().any(|&x| !(0.0..=std::f64::consts::FRAC_PI_2).contains(&x)) {
            return Err(invalid("control angle outside [0, pi/2]"));
        }
        if theta.windows(2).any(|w| (w[1] - w[0]).abs() > QUARTER_PI) {
            return Err(invalid("control angle jumps by more than pi/4"));
        }
        Ok(Self { times, theta })
    }

    /// Constant angle on a two-point grid.
    pub fn constant(theta: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![theta, theta])
    }

    /// Optimal schedule for `n_train` copies believed to carry
    /// `alpha_abs_sq`, sampled at `2·grid_steps + 1` points uniform in `√t`
    /// so that RK4 midpoints of a `grid_steps` integration land on samples.
    pub fn optimal(n_train: u32, alpha_abs_sq: f64, grid_steps: usize) -> Result<Self> {
        let cfg = AgnosticConfig::calibrated(n_train, alpha_abs_sq)?;
        let sol = agnostic_ode_solve(&cfg, 2 * grid_steps.max(MIN_GRID_STEPS / 2))?;
        let theta = sol.pc.iter().map(|p| optimal_control(p - 0.5, n_train)).collect();
        Self::new(sol.times, theta)
    }

    /// Applies `f(t, θ)` to every sample, keeping the grid.
    pub fn map(&self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let theta = self.times.iter().zip(&self.theta).map(|(&t, &th)| f(t, th)).collect();
        Self::new(self.times.clone(), theta)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&x| x < t);
        if idx == 0 {
            return self.theta[0];
        }
        if idx >= self.times.len() {
            return *self.theta.last().unwrap();
        }
        let (s0, s1) = (self.times[idx - 1].sqrt(), self.times[idx].sqrt());
        let w = (t.sqrt() - s0) / (s1 - s0);
        self.theta[idx - 1] * (1.0 - w) + self.theta[idx] * w
    }
}

/// Rates at the detected port for hypothesis `+`.
pub fn agnostic_rates(theta: f64, alpha_abs_sq: f64, n_train: u32) -> DolinarRates {
    let (s, c) = theta.sin_cos();
    let root_n = f64::from(n_train).sqrt();
    let dark = c - root_n * s;
    let bright = c + root_n * s;
    DolinarRates { lambda_t: alpha_abs_sq * dark * dark, mu_t: alpha_abs_sq * bright * bright }
}

/// Reflectivity maximising `dP_c/dt` at `ξ = P_c − ½`:
/// `θ* = ½ atan2(√n, (n−1)ξ)`, which is `π/4` when `ξ = 0` or `n = 1`.
///
/// Without training light (`n = 0`) the angle has no effect; `π/4` is
/// returned.
pub fn optimal_control(xi: f64, n_train: u32) -> f64 {
    if n_train == 0 {
        return QUARTER_PI;
    }
    let n = f64::from(n_train);
    0.5 * n.sqrt().atan2((n - 1.0) * xi)
}

/// `dξ/dt` under the optimal control.
fn optimal_xi_rate(xi: f64, alpha_abs_sq: f64, n: f64) -> f64 {
    let r = (n + (n - 1.0) * (n - 1.0) * xi * xi).sqrt();
    alpha_abs_sq * (r - (n + 1.0) * xi)
}

/// `dξ/dt` for a fixed angle, with the same rates as [`agnostic_rates`].
fn controlled_xi_rate(xi: f64, alpha_abs_sq: f64, n: f64, sin2: f64, cos2: f64) -> f64 {
    alpha_abs_sq * (n.sqrt() * sin2 + (n - 1.0) * xi * cos2 - (n + 1.0) * xi)
}

/// Integrates the optimal equation from `ξ(0) = 0`, uniform steps in `√t`.
///
/// `max_residual` is the largest implicit-relation residual along the
/// computed trajectory.
pub fn agnostic_ode_solve(cfg: &AgnosticConfig, grid_steps: usize) -> Result<OdeSolution> {
    if !cfg.is_calibrated() {
        return Err(invalid("agnostic_ode_solve needs the control amplitude to equal the true one"));
    }
    if grid_steps < MIN_GRID_STEPS {
        return Err(invalid(format!("grid_steps = {grid_steps} below {MIN_GRID_STEPS}")));
    }
    let a = cfg.alpha_abs_sq_true;
    let n = f64::from(cfg.n_train);
    let tr = rk4_sqrt_time(|_, y: &[f64; 1]| [optimal_xi_rate(y[0], a, n)], 0.0, 1.0, [0.0], grid_steps, true);
    let mut max_residual: f64 = 0.0;
    for (t, y) in tr.times.iter().zip(&tr.states) {
        let r = implicit_solution_residual(y[0], *t, a, cfg.n_train)?;
        max_residual = max_residual.max(r.abs());
    }
    let pc = tr.states.iter().map(|y| 0.5 + y[0]).collect();
    Ok(OdeSolution { times: tr.times, pc, solver_steps: grid_steps, max_residual })
}

/// `F(ξ)` with `|α|²t = F(ξ)` on the optimal trajectory:
///
/// `F = −(n−1)/(4n)·atanh((n−1)ξ/R)
///      + (n+1)/(8n)·[atanh(2(n+1)ξR / (2(n²+1)ξ² + n)) − ln(1 − 4ξ²)]`,
/// `R = √(n + (n−1)²ξ²)`.
///
/// Both inverse hyperbolic tangents are rewritten as logarithms that stay
/// accurate when their arguments approach 1.
fn implicit_time(xi: f64, n: f64) -> f64 {
    let u = (n - 1.0) * xi;
    let r = (n + u * u).sqrt();
    let one_minus = (1.0 - 2.0 * xi) * (1.0 + 2.0 * xi);
    let first = (u / n.sqrt()).asinh();
    let second = ((r + (n + 1.0) * xi) / n.sqrt()).ln() - one_minus.ln();
    -(n - 1.0) / (4.0 * n) * first + (n + 1.0) / (4.0 * n) * second
}

/// `|α|²t − F(ξ)`: zero on the optimal trajectory and strictly decreasing in
/// `ξ`.
///
/// Without training light the trajectory is `ξ ≡ 0` and `−ξ` is returned.
pub fn implicit_solution_residual(xi: f64, t: f64, alpha_abs_sq: f64, n_train: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("time {t} outside [0, 1]")));
    }
    if !(xi >= 0.0) || (1.0 - 2.0 * xi) * (1.0 + 2.0 * xi) < 1e-300 {
        return Err(Error::Singular { t, reason: format!("xi = {xi} outside [0, 1/2)") });
    }
    if n_train == 0 {
        return Ok(-xi);
    }
    Ok(alpha_abs_sq * t - implicit_time(xi, f64::from(n_train)))
}

/// `ξ(t)` on the optimal trajectory, by bisection on the implicit relation.
pub fn invert_implicit(t: f64, alpha_abs_sq: f64, n_train: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("time {t} outside [0, 1]")));
    }
    if t == 0.0 || alpha_abs_sq == 0.0 || n_train == 0 {
        return Ok(0.0);
    }
    let hi = 0.5 - 1e-15;
    bisect(|xi| implicit_solution_residual(xi, t, alpha_abs_sq, n_train).unwrap_or(f64::NEG_INFINITY), 0.0, hi, 1e-10)
}

/// Integrates `dP_c/dt = μ − (λ + μ)P_c` with rates at the true amplitude
/// and the supplied reflectivity schedule.
///
/// `max_residual` is a step-doubling estimate of the terminal error.
pub fn propagate_with_control(cfg: &AgnosticConfig, control: &ControlTrajectory, grid_steps: usize) -> Result<OdeSolution> {
    if grid_steps < MIN_GRID_STEPS {
        return Err(invalid(format!("grid_steps = {grid_steps} below {MIN_GRID_STEPS}")));
    }
    let run = |steps: usize, record: bool| {
        let rhs = |t: f64, y: &[f64; 1]| {
            let rates = agnostic_rates(control.theta_at(t), cfg.alpha_abs_sq_true, cfg.n_train);
            [rates.success_derivative(y[0])]
        };
        rk4_sqrt_time(rhs, 0.0, 1.0, [0.5], steps, record)
    };
    let fine = run(grid_steps, true);
    let coarse = run(grid_steps / 2, false);
    let max_residual = (fine.last()[0] - coarse.last()[0]).abs() / 15.0;
    let pc = fine.states.iter().map(|y| y[0]).collect();
    Ok(OdeSolution { times: fine.times, pc, solver_steps: grid_steps, max_residual })
}

/// Terminal `P_c` of a receiver whose control is computed on the fly from
/// `alpha_abs_sq_control`.
///
/// Equivalent to [`propagate_with_control`] with
/// [`ControlTrajectory::optimal`], but integrates the believed and the
/// actual trajectories jointly, with no tabulation or trigonometry.
pub fn terminal_success(cfg: &AgnosticConfig, grid_steps: usize) -> Result<f64> {
    if grid_steps < MIN_GRID_STEPS {
        return Err(invalid(format!("grid_steps = {grid_steps} below {MIN_GRID_STEPS}")));
    }
    let (a_true, a_ctrl) = (cfg.alpha_abs_sq_true, cfg.alpha_abs_sq_control);
    if cfg.n_train == 0 || a_true == 0.0 {
        return Ok(0.5);
    }
    let n = f64::from(cfg.n_train);
    let root_n = n.sqrt();
    let rhs = |_t: f64, y: &[f64; 2]| {
        let believed = y[0];
        let r = (n + (n - 1.0) * (n - 1.0) * believed * believed).sqrt();
        let sin2 = root_n / r;
        let cos2 = (n - 1.0) * believed / r;
        [a_ctrl * (r - (n + 1.0) * believed), controlled_xi_rate(y[1], a_true, n, sin2, cos2)]
    };
    let tr = rk4_sqrt_time(rhs, 0.0, 1.0, [0.0, 0.0], grid_steps, false);
    Ok(0.5 + tr.last()[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::mec_optimal_error;
    use crate::dolinar::dolinar_success;
    use proptest::prelude::*;

    #[test]
    fn rate_examples() {
        let r = agnostic_rates(0.0, 0.3, 5);
        assert_eq!((r.lambda_t, r.mu_t), (0.3, 0.3));
        let r = agnostic_rates((1.0 / 3.0f64).atan(), 0.7, 9);
        assert!(r.lambda_t.abs() < 1e-15);
        let r = agnostic_rates(QUARTER_PI, 0.4, 1);
        assert!(r.lambda_t.abs() < 1e-16 && (r.mu_t - 0.8).abs() < 1e-15);
    }

    #[test]
    fn control_examples() {
        assert_eq!(optimal_control(0.0, 7), QUARTER_PI);
        assert_eq!(optimal_control(0.3, 1), QUARTER_PI);
        // grid-search oracle for n = 4, ξ = 1/4
        let (n, xi) = (4.0, 0.25);
        let best = (0..=100_000)
            .map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / 100_000.0)
            .max_by(|x, y| {
                let f = |th: f64| controlled_xi_rate(xi, 1.0, n, (2.0 * th).sin(), (2.0 * th).cos());
                f(*x).total_cmp(&f(*y))
            })
            .unwrap();
        assert!((optimal_control(xi, 4) - best).abs() < 2e-5);
    }

    #[test]
    fn single_copy_closed_form() {
        let cfg = AgnosticConfig::calibrated(1, 0.25).unwrap();
        let sol = agnostic_ode_solve(&cfg, 200).unwrap();
        assert!((sol.terminal_error() - 0.5 * (-0.5f64).exp()).abs() < 1e-10);
        assert!((sol.terminal_error() - 0.303265329856316).abs() < 1e-10);
        let sol = agnostic_ode_solve(&AgnosticConfig::calibrated(5, 0.0).unwrap(), 100).unwrap();
        assert!(sol.pc.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn large_training_set_approaches_dolinar() {
        let cfg = AgnosticConfig::calibrated(1_000_000, 0.390625).unwrap();
        let sol = agnostic_ode_solve(&cfg, 4000).unwrap();
        let d = dolinar_success(0.5, 0.5, 0.390625, 1.0).unwrap();
        assert!((sol.terminal() - d).abs() < 1e-4);
    }

    #[test]
    fn implicit_time_derivative_matches_the_equation() {
        for n in [1.0, 2.0, 5.0, 40.0] {
            for xi in [0.01, 0.2, 0.45] {
                let h = 1e-6;
                let fd = (implicit_time(xi + h, n) - implicit_time(xi - h, n)) / (2.0 * h);
                let rate = optimal_xi_rate(xi, 1.0, n);
                assert!((fd * rate - 1.0).abs() < 1e-7, "n {n} xi {xi}");
            }
        }
    }

    #[test]
    fn implicit_time_matches_inverse_hyperbolic_form() {
        for n in [2.0f64, 5.0, 33.0] {
            for xi in [0.05f64, 0.3, 0.49] {
                let r = (n + (n - 1.0) * (n - 1.0) * xi * xi).sqrt();
                let arg = 2.0 * (n + 1.0) * xi * r / (2.0 * (n * n + 1.0) * xi * xi + n);
                let f = -(n - 1.0) / (4.0 * n) * ((n - 1.0) * xi / r).atanh()
                    + (n + 1.0) / (8.0 * n) * (arg.atanh() - (1.0 - 4.0 * xi * xi).ln());
                assert!((f - implicit_time(xi, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_properties() {
        assert_eq!(implicit_solution_residual(0.0, 0.0, 0.4, 3).unwrap(), 0.0);
        assert!(implicit_solution_residual(0.5, 0.5, 0.4, 3).is_err());
        let vals: Vec<f64> = (0..200).map(|i| implicit_solution_residual(i as f64 / 400.0, 0.6, 0.5, 6).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        let sol = agnostic_ode_solve(&AgnosticConfig::calibrated(5, 0.39).unwrap(), 1000).unwrap();
        let xi = sol.at(0.7) - 0.5;
        // interpolation between grid points dominates here
        assert!(implicit_solution_residual(xi, 0.7, 0.39, 5).unwrap().abs() < 1e-6);
    }

    #[test]
    fn triple_agreement() {
        for n in [1u32, 2, 5, 16, 64] {
            for x in [0.1, 0.4, 0.7, 1.0, 1.5] {
                let a = x * x;
                let sol = agnostic_ode_solve(&AgnosticConfig::calibrated(n, a).unwrap(), 1000).unwrap();
                let xi = invert_implicit(1.0, a, n).unwrap();
                assert!((sol.terminal() - 0.5 - xi).abs() < 1e-6, "n {n} x {x}");
                assert!(sol.max_residual < 1e-6);
                assert!(implicit_solution_residual(xi, 1.0, a, n).unwrap().abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn propagation_reproduces_calibrated_solution() {
        let cfg = AgnosticConfig::calibrated(8, 0.25).unwrap();
        let control = ControlTrajectory::optimal(8, 0.25, 1000).unwrap();
        let prop = propagate_with_control(&cfg, &control, 1000).unwrap();
        let direct = agnostic_ode_solve(&cfg, 1000).unwrap();
        assert!((prop.terminal() - direct.terminal()).abs() < 1e-6);
        assert!((terminal_success(&cfg, 1000).unwrap() - direct.terminal()).abs() < 1e-9);
    }

    #[test]
    fn single_copy_control_is_amplitude_free() {
        let calibrated = AgnosticConfig::calibrated(1, 0.5).unwrap();
        let blind = AgnosticConfig::new(1, 0.5, 0.0).unwrap();
        let control = ControlTrajectory::optimal(1, 0.0, 500).unwrap();
        assert!(control.theta().iter().all(|&t| t == QUARTER_PI));
        let a = propagate_with_control(&blind, &control, 500).unwrap().terminal();
        let b = agnostic_ode_solve(&calibrated, 500).unwrap().terminal();
        assert!((a - b).abs() < 1e-9);
        assert!((terminal_success(&blind, 500).unwrap() - b).abs() < 1e-9);
    }

    #[test]
    fn wrong_control_is_suboptimal() {
        let cfg = AgnosticConfig::new(8, 0.25, 1.0).unwrap();
        let over = terminal_success(&cfg, 1000).unwrap();
        let control = ControlTrajectory::optimal(8, 1.0, 1000).unwrap();
        let tabulated = propagate_with_control(&cfg, &control, 1000).unwrap().terminal();
        let best = terminal_success(&AgnosticConfig::calibrated(8, 0.25).unwrap(), 1000).unwrap();
        assert!(over < best - 1e-6);
        assert!((over - tabulated).abs() < 1e-6);
    }

    #[test]
    fn optimal_control_beats_perturbations() {
        let cfg = AgnosticConfig::calibrated(8, 0.36).unwrap();
        let control = ControlTrajectory::optimal(8, 0.36, 1000).unwrap();
        let best = propagate_with_control(&cfg, &control, 1000).unwrap().terminal();
        for eps in [-0.01, 0.01] {
            for k in 1..=3 {
                let bent = control.map(|t, th| th + eps * (k as f64 * std::f64::consts::PI * t).sin()).unwrap();
                let p = propagate_with_control(&cfg, &bent, 1000).unwrap().terminal();
                assert!(p < best, "eps {eps} k {k}");
            }
        }
    }

    #[test]
    fn more_training_copies_help_and_respect_the_bound() {
        for x in [0.25, 0.625, 1.0] {
            let a = x * x;
            let mut prev = 0.0;
            for n in 1..=64 {
                let p = terminal_success(&AgnosticConfig::calibrated(n, a).unwrap(), 400).unwrap();
                assert!(p >= prev - 1e-12, "n {n} x {x}");
                assert!(1.0 - p >= mec_optimal_error(n, a).unwrap() - 1e-9, "n {n} x {x}");
                prev = p;
            }
        }
    }

    proptest! {
        #[test]
        fn rates_nonnegative_and_ordered(theta in 0.0..1.5707f64, a in 0.0..3.0f64, n in 0u32..200) {
            let r = agnostic_rates(theta, a, n);
            prop_assert!(r.lambda_t >= 0.0 && r.mu_t >= 0.0);
            prop_assert!(r.mu_t >= r.lambda_t);
        }

        #[test]
        fn control_in_principal_branch(xi in 0.0..0.4999f64, n in 1u32..10_000) {
            let th = optimal_control(xi, n);
            prop_assert!(th > 0.0 && th <= QUARTER_PI + 1e-15);
        }
    }
}
