//! Monte Carlo simulation of the detection record, and the finite chain of
//! beam splitters that the continuous receiver idealises.
//!
//! A trial draws the true class, starts from the more likely guess and
//! flips the guess at every click. Clicks arrive at rate `λ` while the guess
//! is right and `μ` while it is wrong, so only the starting "channel"
//! depends on the truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agnostic::{agnostic_rates, ControlTrajectory};
use crate::dolinar::{dolinar_rates, optimal_displacement, optimal_rates, DolinarRates};
use crate::error::{invalid, Result};
use crate::numerics::ode::rk4_sqrt_time;
use crate::optics::{check_probability, ComplexAmplitude};

/// Largest click probability allowed in one slice; coarser slices are split.
pub const RATE_STEP_CAP: f64 = 0.01;

/// Halvings allowed when refining a slice. A slice still too coarse at this
/// depth can only sit on a rate singularity at `t = 0` and is left silent.
const MAX_REFINE_DEPTH: u32 = 60;

/// Rates `λ(t)`, `μ(t)` seen by the receiver.
pub trait RateSchedule: Sync {
    fn rates(&self, t: f64) -> DolinarRates;
}

impl<F: Fn(f64) -> DolinarRates + Sync> RateSchedule for F {
    fn rates(&self, t: f64) -> DolinarRates {
        self(t)
    }
}

/// Optimally controlled Dolinar receiver for `|±α⟩` with prior `p₊`.
#[derive(Debug, Clone, Copy)]
pub struct OptimalDolinar {
    pub p_plus: f64,
    pub alpha: ComplexAmplitude,
}

impl RateSchedule for OptimalDolinar {
    fn rates(&self, t: f64) -> DolinarRates {
        optimal_rates(self.p_plus, self.alpha, t)
    }
}

/// Agnostic receiver on `n_train` copies following a reflectivity schedule.
#[derive(Debug, Clone)]
pub struct AgnosticSchedule {
    pub n_train: u32,
    pub alpha_abs_sq: f64,
    pub control: ControlTrajectory,
}

impl AgnosticSchedule {
    pub fn calibrated(n_train: u32, alpha_abs_sq: f64, grid_steps: usize) -> Result<Self> {
        Ok(Self { n_train, alpha_abs_sq, control: ControlTrajectory::optimal(n_train, alpha_abs_sq, grid_steps)? })
    }
}

impl RateSchedule for AgnosticSchedule {
    fn rates(&self, t: f64) -> DolinarRates {
        agnostic_rates(self.control.theta_at(t), self.alpha_abs_sq, self.n_train)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    /// Uniform slices before refinement.
    pub slices: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(trials: u64, slices: usize, seed: u64) -> Result<Self> {
        if trials == 0 || slices == 0 {
            return Err(invalid("Monte Carlo needs trials >= 1 and slices >= 1"));
        }
        Ok(Self { trials, slices, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub success_rate: f64,
    pub trials: u64,
    /// `√(p(1 − p)/trials)`.
    pub std_error: f64,
    /// Slices actually simulated after refinement.
    pub slices_used: usize,
}

impl McResult {
    fn from_count(successes: u64, trials: u64, slices_used: usize) -> Self {
        let p = successes as f64 / trials as f64;
        Self { success_rate: p, trials, std_error: (p * (1.0 - p) / trials as f64).sqrt(), slices_used }
    }

    /// `|success_rate − reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let se = self.std_error.max(f64::MIN_POSITIVE);
        (self.success_rate - reference).abs() / se
    }
}

/// Time slices with per-slice click probabilities in cumulative
/// log-survival form, so the next click can be found by bisection.
struct ClickTable {
    edges: Vec<f64>,
    // log_survival[c][i] = Σ_{j<i} ln(1 − p_c,j); c = 0 for λ, 1 for μ.
    log_survival: [Vec<f64>; 2],
}

impl ClickTable {
    fn build<S: RateSchedule + ?Sized>(schedule: &S, slices: usize, marks: &[f64]) -> Self {
        let mut coarse: Vec<f64> = (0..=slices).map(|i| i as f64 / slices as f64).collect();
        coarse.extend(marks.iter().copied().filter(|t| *t > 0.0 && *t < 1.0));
        coarse.sort_by(f64::total_cmp);
        coarse.dedup();

        let mut edges = vec![0.0];
        let mut probs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        let mut stack = Vec::new();
        for w in coarse.windows(2) {
            stack.push((w[0], w[1], 0u32));
            while let Some((a, b, depth)) = stack.pop() {
                let r = schedule.rates(0.5 * (a + b));
                let dt = b - a;
                let too_coarse = r.max() * dt > RATE_STEP_CAP || !r.max().is_finite();
                if too_coarse && depth < MAX_REFINE_DEPTH {
                    let mid = 0.5 * (a + b);
                    // right half first so the left half is processed next
                    stack.push((mid, b, depth + 1));
                    stack.push((a, mid, depth + 1));
                    continue;
                }
                let (pl, pm) = if too_coarse { (0.0, 0.0) } else { (r.lambda_t * dt, r.mu_t * dt) };
                probs[0].push(pl);
                probs[1].push(pm);
                edges.push(b);
            }
        }
        let cumulate = |p: &[f64]| {
            let mut out = Vec::with_capacity(p.len() + 1);
            let mut acc = 0.0;
            out.push(0.0);
            for &x in p {
                acc += (-x).ln_1p();
                out.push(acc);
            }
            out
        };
        let log_survival = [cumulate(&probs[0]), cumulate(&probs[1])];
        Self { edges, log_survival }
    }

    fn slices(&self) -> usize {
        self.edges.len() - 1
    }

    /// First slice `j >= from` on `channel` that clicks, given `ln U`.
    fn next_click(&self, channel: usize, from: usize, ln_u: f64) -> Option<usize> {
        let table = &self.log_survival[channel];
        let target = table[from] + ln_u;
        // survival past slice j is table[j + 1] - table[from]
        let rest = &table[from + 1..];
        let j = rest.partition_point(|&x| x >= target);
        (j < rest.len()).then_some(from + j)
    }

    fn edge_index(&self, t: f64) -> usize {
        self.edges.partition_point(|&e| e < t).min(self.slices())
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Runs one trial from `channel` (0 while the guess is right) and returns
/// the channel at each requested edge index.
fn run_trial(table: &ClickTable, mut channel: usize, rng: &mut ChaCha8Rng, at_edges: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let mut from = 0;
    let mut pending = at_edges.iter().peekable();
    loop {
        let click = table.next_click(channel, from, uniform_open(rng).ln());
        let stop = click.map_or(usize::MAX, |j| j + 1);
        while let Some(&&e) = pending.peek() {
            if e >= stop {
                break;
            }
            out.push(channel);
            pending.next();
        }
        match click {
            Some(j) => {
                channel ^= 1;
                from = j + 1;
                if from >= table.slices() {
                    out.extend(pending.map(|_| channel));
                    return;
                }
            }
            None => return,
        }
    }
}

/// Simulates the receiver and returns the empirical success rate at `t = 1`.
///
/// Each slice clicks with probability `rate·Δt` (rate at the slice
/// midpoint); slices are halved until `rate·Δt ≤` [`RATE_STEP_CAP`]. Trial
/// `i` draws from the ChaCha8 stream `i` of `seed`, so results do not depend
/// on thread scheduling.
pub fn simulate_receiver<S: RateSchedule + ?Sized>(schedule: &S, cfg: McConfig, p_plus: f64) -> Result<McResult> {
    check_probability(p_plus, "p_plus")?;
    let table = ClickTable::build(schedule, cfg.slices, &[]);
    let end = [table.slices()];
    let plus_first = p_plus >= 0.5;
    let successes: u64 = (0..cfg.trials)
        .into_par_iter()
        .map_init(Vec::new, |buf, trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let truth_plus = rng.gen::<f64>() < p_plus;
            let channel = usize::from(truth_plus != plus_first);
            run_trial(&table, channel, &mut rng, &end, buf);
            u64::from(buf[0] == 0)
        })
        .sum();
    Ok(McResult::from_count(successes, cfg.trials, table.slices()))
}

/// Conditional success probabilities at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPair {
    pub t: f64,
    /// `P[z(t) = + | k = +]`.
    pub q_plus: f64,
    /// `P[z(t) = − | k = −]`.
    pub q_minus: f64,
}

/// Monte Carlo `q₊`, `q₋` at each checkpoint, starting from `z(0) = +`,
/// with `cfg.trials` trials per class. The standard error of each entry is
/// `√(q(1 − q)/trials)`.
pub fn simulate_q_pair<S: RateSchedule + ?Sized>(schedule: &S, cfg: McConfig, checkpoints: &[f64]) -> Result<Vec<QPair>> {
    if checkpoints.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("checkpoints must lie in [0, 1]"));
    }
    let table = ClickTable::build(schedule, cfg.slices, checkpoints);
    let edges: Vec<usize> = checkpoints.iter().map(|&t| table.edge_index(t)).collect();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&i| edges[i]);
    let sorted: Vec<usize> = order.iter().map(|&i| edges[i]).collect();

    let count = |start: usize, stream_offset: u64| -> Vec<u64> {
        (0..cfg.trials)
            .into_par_iter()
            .map_init(Vec::new, |buf, trial| {
                let mut rng = trial_rng(cfg.seed, stream_offset + trial);
                run_trial(&table, start, &mut rng, &sorted, buf);
                buf.iter().map(|&c| u64::from(c == 0)).collect::<Vec<u64>>()
            })
            .reduce(|| vec![0; sorted.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
    };
    // z(0) = +: right for k = +, wrong for k = −
    let plus = count(0, 0);
    let minus = count(1, cfg.trials);
    let n = cfg.trials as f64;
    let mut out = vec![QPair { t: 0.0, q_plus: 0.0, q_minus: 0.0 }; checkpoints.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = QPair { t: checkpoints[i], q_plus: plus[rank] as f64 / n, q_minus: minus[rank] as f64 / n };
    }
    Ok(out)
}

/// Integrates `dq/dt = μ − (λ + μ)q` for `q₊(0) = 1`, `q₋(0) = 0` and reports
/// the pair at each checkpoint (ascending). Needs rates finite at `t = 0`.
pub fn q_pair_ode<S: RateSchedule + ?Sized>(schedule: &S, checkpoints: &[f64], steps: usize) -> Result<Vec<QPair>> {
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("checkpoints must be increasing within [0, 1]"));
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut t = 0.0;
    let mut y = [1.0, 0.0];
    for &c in checkpoints {
        if c > t {
            let rhs = |s: f64, q: &[f64; 2]| {
                let r = schedule.rates(s);
                [r.success_derivative(q[0]), r.success_derivative(q[1])]
            };
            y = rk4_sqrt_time(rhs, t, c, y, steps.max(1), false).last();
            t = c;
        }
        out.push(QPair { t: c, q_plus: y[0], q_minus: y[1] });
    }
    Ok(out)
}

/// Success probability of the `K`-slice chain: each slice taps a fraction
/// `1/K` of the signal, displaces it by `±γ_k` and counts photons; the guess
/// follows the parity of the counts.
///
/// `γ_k` is the continuous optimal displacement at the slice midpoint, and
/// a slice flips the guess with the odd-count probability `(1 − e^{−2ν})/2`.
pub fn discretized_dolinar(k: usize, alpha: ComplexAmplitude, p_plus: f64) -> Result<f64> {
    check_probability(p_plus, "p_plus")?;
    if k < 10 {
        return Err(invalid(format!("discretized chain needs K >= 10, got {k}")));
    }
    let p_best = p_plus.max(1.0 - p_plus);
    let a = alpha.abs_sq();
    if a == 0.0 || p_best == 1.0 {
        return Ok(p_best);
    }
    let odd = |nu: f64| -0.5 * (-2.0 * nu).exp_m1();
    let kf = k as f64;
    // q_plus: guess right given it started right; q_minus: started wrong
    let (mut q_plus, mut q_minus) = (1.0, 0.0);
    for i in 0..k {
        let t_mid = (i as f64 + 0.5) / kf;
        let pc = 0.5 * (1.0 + (1.0 - 4.0 * p_best * (1.0 - p_best) * (-4.0 * a * t_mid).exp()).sqrt());
        let r = dolinar_rates(alpha, optimal_displacement(alpha, pc));
        let f_right = odd(r.lambda_t / kf);
        let f_wrong = odd(r.mu_t / kf);
        q_plus = q_plus * (1.0 - f_right) + (1.0 - q_plus) * f_wrong;
        q_minus = q_minus * (1.0 - f_right) + (1.0 - q_minus) * f_wrong;
    }
    Ok(p_best * q_plus + (1.0 - p_best) * q_minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agnostic::{terminal_success, AgnosticConfig};
    use crate::dolinar::{dolinar_success, helstrom_success_symmetric};

    fn a(x: f64) -> ComplexAmplitude {
        ComplexAmplitude::real(x)
    }

    #[test]
    fn zero_rates_keep_the_first_guess() {
        let silent = |_t: f64| DolinarRates { lambda_t: 0.0, mu_t: 0.0 };
        let cfg = McConfig::new(20_000, 50, 7).unwrap();
        let r = simulate_receiver(&silent, cfg, 0.7).unwrap();
        assert!(r.z_score(0.7) < 4.0);
        assert_eq!(r, simulate_receiver(&silent, cfg, 0.7).unwrap());
    }

    #[test]
    fn constant_rates_match_two_state_chain() {
        // q' = μ − (λ+μ)q from q(0)=1 at constant rates
        let (l, m) = (0.3, 1.7);
        let rates = move |_t: f64| DolinarRates { lambda_t: l, mu_t: m };
        let exact = m / (l + m) + (1.0 - m / (l + m)) * (-(l + m)).exp();
        let r = simulate_receiver(&rates, McConfig::new(100_000, 2000, 1).unwrap(), 1.0).unwrap();
        assert!(r.z_score(exact) < 4.0, "{} vs {exact}", r.success_rate);
    }

    #[test]
    fn refinement_respects_cap() {
        let sched = OptimalDolinar { p_plus: 0.5, alpha: a(0.625) };
        let table = ClickTable::build(&sched, 100, &[]);
        assert!(table.slices() > 100);
        assert!(table.edges.windows(2).all(|w| w[1] > w[0]));
        for c in 0..2 {
            for w in table.log_survival[c].windows(2) {
                let p = -(w[1] - w[0]).exp_m1();
                assert!(p <= RATE_STEP_CAP * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn dolinar_monte_carlo_matches_closed_form() {
        let sched = OptimalDolinar { p_plus: 0.5, alpha: a(0.625) };
        let r = simulate_receiver(&sched, McConfig::new(100_000, 2000, 11).unwrap(), 0.5).unwrap();
        let exact = dolinar_success(0.5, 0.5, 0.390625, 1.0).unwrap();
        assert!(r.z_score(exact) < 3.0, "{} vs {exact}", r.success_rate);
    }

    #[test]
    fn q_pair_matches_ode() {
        let sched = AgnosticSchedule::calibrated(8, 0.25, 1000).unwrap();
        let ts = [0.25, 0.5, 1.0];
        let cfg = McConfig::new(100_000, 2000, 5).unwrap();
        let mc = simulate_q_pair(&sched, cfg, &ts).unwrap();
        let ode = q_pair_ode(&sched, &ts, 2000).unwrap();
        for (m, o) in mc.iter().zip(&ode) {
            for (x, y) in [(m.q_plus, o.q_plus), (m.q_minus, o.q_minus)] {
                let se = (y * (1.0 - y) / 100_000.0).sqrt();
                assert!((x - y).abs() < 3.0 * se + 1e-12, "t {}: {x} vs {y}", m.t);
            }
        }
        let terminal = terminal_success(&AgnosticConfig::calibrated(8, 0.25).unwrap(), 1000).unwrap();
        let last = ode.last().unwrap();
        assert!((0.5 * (last.q_plus + last.q_minus) - terminal).abs() < 1e-6);
    }

    #[test]
    fn doubling_slices_is_within_noise() {
        let sched = AgnosticSchedule::calibrated(8, 0.25, 1000).unwrap();
        let coarse = simulate_receiver(&sched, McConfig::new(100_000, 1000, 3).unwrap(), 0.5).unwrap();
        let fine = simulate_receiver(&sched, McConfig::new(100_000, 2000, 3).unwrap(), 0.5).unwrap();
        assert!((coarse.success_rate - fine.success_rate).abs() < 2.0 * coarse.std_error);
    }

    #[test]
    fn chain_examples() {
        assert_eq!(discretized_dolinar(10, ComplexAmplitude::ZERO, 0.3).unwrap(), 0.7);
        assert!(discretized_dolinar(9, a(0.2), 0.5).is_err());
        let h = helstrom_success_symmetric(0.0625);
        let gaps: Vec<f64> = [10, 100, 1000, 10_000].iter().map(|&k| h - discretized_dolinar(k, a(0.25), 0.5).unwrap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[3] < 1e-3 && gaps[3] > 0.0);
    }
}
