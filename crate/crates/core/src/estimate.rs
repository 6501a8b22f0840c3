//! Estimating `|α|` from part of the training set.
//!
//! `m` of the `n` training copies are concentrated into `|√m α⟩` and
//! measured once, either by photon counting or by heterodyne detection. The
//! estimate then calibrates the control of an agnostic receiver fed with the
//! remaining `n − m` copies.

use serde::{Deserialize, Serialize};

use crate::agnostic::{terminal_success, AgnosticConfig};
use crate::bounds::{poisson_pmf, RicePrior};
use crate::error::{invalid, Result};
use crate::numerics::quadrature::{integrate, Tolerance};
use crate::numerics::special::bessel_i0e;
use crate::numerics::CompensatedSum;
use crate::optics::ComplexAmplitude;

/// Remaining Poisson mass below which the photon-count sum stops.
pub const PHOTON_TAIL: f64 = 1e-12;

/// Default solver resolution for each receiver propagation.
pub const DEFAULT_GRID_STEPS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    PhotonCounting,
    Heterodyne,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 2] = [EstimatorKind::PhotonCounting, EstimatorKind::Heterodyne];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::PhotonCounting => "photon",
            EstimatorKind::Heterodyne => "heterodyne",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "photon" | "photon_counting" => Ok(EstimatorKind::PhotonCounting),
            "heterodyne" => Ok(EstimatorKind::Heterodyne),
            other => Err(invalid(format!("unknown estimator {other:?}"))),
        }
    }
}

/// `m` copies for the estimate, `n − m ≥ 1` for the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub n_total: u32,
    pub m_estimate: u32,
}

impl SplitConfig {
    pub fn new(n_total: u32, m_estimate: u32) -> Result<Self> {
        if m_estimate >= n_total {
            return Err(invalid(format!("split m = {m_estimate} leaves no copies out of n = {n_total}")));
        }
        Ok(Self { n_total, m_estimate })
    }

    pub fn receiver_copies(&self) -> u32 {
        self.n_total - self.m_estimate
    }
}

/// Knobs for [`split_performance_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    pub grid_steps: usize,
    /// Use `max(s − 1, 0)/m` for heterodyne, removing the vacuum-noise bias.
    pub bias_corrected: bool,
    /// Absolute tolerance of the heterodyne quadrature.
    pub quad_tol: f64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        Self { grid_steps: DEFAULT_GRID_STEPS, bias_corrected: false, quad_tol: 1e-9 }
    }
}

/// Poisson probability of `k` clicks on `|√m α⟩`.
pub fn photon_count_pmf(k: u64, m: u32, alpha_abs_sq: f64) -> f64 {
    poisson_pmf(k, f64::from(m) * alpha_abs_sq)
}

/// Density of `s = |β|²` for heterodyne on `|√m α⟩`:
/// `e^{−(m|α|² + s)} I₀(2√(m|α|² s))`.
pub fn heterodyne_radial_pdf(b_abs_sq: f64, m: u32, alpha_abs_sq: f64) -> f64 {
    if b_abs_sq < 0.0 {
        return 0.0;
    }
    let mean = f64::from(m) * alpha_abs_sq;
    let d = mean.sqrt() - b_abs_sq.sqrt();
    (-d * d).exp() * bessel_i0e(2.0 * (mean * b_abs_sq).sqrt())
}

/// Expected terminal `P_c` of the agnostic receiver on `n − m` copies whose
/// control uses the estimate from the other `m`.
pub fn split_performance(alpha: ComplexAmplitude, split: SplitConfig, est: EstimatorKind) -> Result<f64> {
    split_performance_with(alpha, split, est, SplitOptions::default())
}

pub fn split_performance_with(
    alpha: ComplexAmplitude,
    split: SplitConfig,
    est: EstimatorKind,
    opts: SplitOptions,
) -> Result<f64> {
    let a = alpha.abs_sq();
    let copies = split.receiver_copies();
    let receiver = |estimate: f64| terminal_success(&AgnosticConfig::new(copies, a, estimate)?, opts.grid_steps);
    if a == 0.0 {
        return Ok(0.5);
    }
    if split.m_estimate == 0 {
        return receiver(0.0);
    }
    let m = split.m_estimate;
    let mf = f64::from(m);
    match est {
        EstimatorKind::PhotonCounting => {
            let mut sum = CompensatedSum::new();
            let mut mass = CompensatedSum::new();
            let mut k = 0u64;
            loop {
                let w = photon_count_pmf(k, m, a);
                let p = receiver(k as f64 / mf)?;
                mass.add(w);
                let remaining = 1.0 - mass.value();
                let past_mode = k as f64 >= mf * a;
                if past_mode && remaining < PHOTON_TAIL {
                    sum.add((w + remaining.max(0.0)) * p);
                    break;
                }
                sum.add(w * p);
                k += 1;
            }
            Ok(sum.value())
        }
        EstimatorKind::Heterodyne => {
            let mean = mf * a;
            let hi = (mean.sqrt() + 8.0).powi(2);
            let mut failure = None;
            let integrand = |s: f64| {
                let estimate = if opts.bias_corrected { (s - 1.0).max(0.0) / mf } else { s / mf };
                match receiver(estimate) {
                    Ok(p) => heterodyne_radial_pdf(s, m, a) * p,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            };
            let value = integrate(integrand, 0.0, hi, Tolerance::absolute(opts.quad_tol))?.value;
            match failure {
                Some(e) => Err(e),
                None => Ok(value),
            }
        }
    }
}

/// Number of copies spent on the estimate when it must be fixed in advance.
///
/// `n = 4 → 2` and `n = 8 → 3`; otherwise `round(√n)` limited to
/// `[1, n − 1]`, which also gives `15 → 4`.
pub fn apriori_m(n_total: u32) -> Result<u32> {
    if n_total < 2 {
        return Err(invalid(format!("a split needs n >= 2, got {n_total}")));
    }
    Ok(match n_total {
        4 => 2,
        8 => 3,
        n => (f64::from(n).sqrt().round() as u32).clamp(1, n - 1),
    })
}

/// Rice-averaged error `∫ p(|α|) (1 − split_performance) d|α|` with the
/// split from [`apriori_m`].
pub fn rice_averaged_error(n_total: u32, prior: &RicePrior, est: EstimatorKind) -> Result<f64> {
    rice_averaged_error_with(n_total, prior, est, SplitOptions::default())
}

pub fn rice_averaged_error_with(n_total: u32, prior: &RicePrior, est: EstimatorKind, opts: SplitOptions) -> Result<f64> {
    let split = SplitConfig::new(n_total, apriori_m(n_total)?)?;
    let mut failure = None;
    let value = prior.expectation(
        |r| match split_performance_with(ComplexAmplitude::real(r), split, est, opts) {
            Ok(p) => 1.0 - p,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        Tolerance::absolute(1e-8),
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::mec_optimal_error_with_prior;

    fn a(x: f64) -> ComplexAmplitude {
        ComplexAmplitude::real(x)
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(photon_count_pmf(0, 3, 0.0), 1.0);
        assert!((photon_count_pmf(1, 1, 1.0) - 0.367_879_441_171_442_32).abs() < 1e-16);
        let total: f64 = (0..60).map(|k| photon_count_pmf(k, 4, 1.5)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = (0..80).map(|k| k as f64 / 4.0 * photon_count_pmf(k, 4, 1.5)).sum();
        assert!((mean - 1.5).abs() < 1e-12);
    }

    #[test]
    fn heterodyne_density_moments() {
        assert!((heterodyne_radial_pdf(0.7, 2, 0.0) - (-0.7f64).exp()).abs() < 1e-16);
        for mean in [0.25, 1.0, 4.0] {
            let hi = (f64::sqrt(mean) + 9.0).powi(2);
            let tol = Tolerance::absolute(1e-12);
            let norm = integrate(|s| heterodyne_radial_pdf(s, 1, mean), 0.0, hi, tol).unwrap().value;
            let first = integrate(|s| s * heterodyne_radial_pdf(s, 1, mean), 0.0, hi, tol).unwrap().value;
            assert!((norm - 1.0).abs() < 1e-8);
            assert!((first - (1.0 + mean)).abs() < 1e-8);
        }
    }

    #[test]
    fn split_validation_and_apriori() {
        assert!(SplitConfig::new(4, 4).is_err());
        assert_eq!(SplitConfig::new(4, 0).unwrap().receiver_copies(), 4);
        assert_eq!(apriori_m(4).unwrap(), 2);
        assert_eq!(apriori_m(8).unwrap(), 3);
        assert_eq!(apriori_m(2).unwrap(), 1);
        assert_eq!(apriori_m(15).unwrap(), 4);
        assert!(apriori_m(1).is_err());
        assert_eq!("photon".parse::<EstimatorKind>().unwrap(), EstimatorKind::PhotonCounting);
        assert!("coin".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn zero_amplitude_gives_coin_flip() {
        for est in EstimatorKind::ALL {
            assert_eq!(split_performance(ComplexAmplitude::ZERO, SplitConfig::new(5, 2).unwrap(), est).unwrap(), 0.5);
        }
    }

    #[test]
    fn estimation_never_beats_calibration() {
        for x in [0.3, 0.6, 1.0] {
            for (n, m) in [(4u32, 1u32), (4, 2), (8, 3)] {
                let cal = terminal_success(&AgnosticConfig::calibrated(n - m, x * x).unwrap(), DEFAULT_GRID_STEPS).unwrap();
                for est in EstimatorKind::ALL {
                    let p = split_performance(a(x), SplitConfig::new(n, m).unwrap(), est).unwrap();
                    assert!(p <= cal + 1e-9, "x {x} n {n} m {m} {est:?}");
                    assert!(p >= 0.5);
                }
            }
        }
    }

    #[test]
    fn large_estimate_set_recovers_calibration() {
        let cal = terminal_success(&AgnosticConfig::calibrated(8, 0.25).unwrap(), DEFAULT_GRID_STEPS).unwrap();
        for est in EstimatorKind::ALL {
            let p = split_performance(a(0.5), SplitConfig::new(1008, 1000).unwrap(), est).unwrap();
            assert!((p - cal).abs() < 1e-3, "{est:?}: {p} vs {cal}");
        }
    }

    #[test]
    fn narrow_prior_matches_point_evaluation() {
        let prior = RicePrior::new(1e-4, 0.6).unwrap();
        let avg = rice_averaged_error(4, &prior, EstimatorKind::PhotonCounting).unwrap();
        let point = 1.0 - split_performance(a(0.6), SplitConfig::new(4, 2).unwrap(), EstimatorKind::PhotonCounting).unwrap();
        assert!((avg - point).abs() < 1e-3);
        let vanishing = rice_averaged_error(4, &RicePrior::new(1e-4, 0.0).unwrap(), EstimatorKind::Heterodyne).unwrap();
        assert!((vanishing - 0.5).abs() < 1e-3);
    }

    #[test]
    fn rice_average_respects_the_bound() {
        let prior = RicePrior::new(0.1, 0.5).unwrap();
        for n in [4, 8] {
            let bound = mec_optimal_error_with_prior(n, &prior).unwrap();
            for est in EstimatorKind::ALL {
                assert!(rice_averaged_error(n, &prior, est).unwrap() >= bound);
            }
        }
    }
}
