//! Error bounds: the Helstrom value for two known coherent states, the
//! optimal phase-invariant classification error with `n` training copies
//! (exact series, large-`n` expansion and Rice-prior average) and a
//! sector-by-sector Fock-space oracle for the series.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::quadrature::{integrate, Tolerance};
use crate::numerics::special::{bessel_i0e, ln_binomial};
use crate::numerics::CompensatedSum;
use crate::optics::{check_priors, overlap_modulus_sq, ComplexAmplitude};

/// Truncation thresholds for the Poisson series.
const WEIGHT_FLOOR: f64 = 1e-15;
const MASS_DEFICIT: f64 = 1e-12;

/// Prior-averaging quadrature tolerance.
const PRIOR_QUAD_TOL: f64 = 1e-10;

/// Largest photon-number sector the explicit Fock oracle builds.
pub const MAX_ORACLE_SECTOR: u32 = 60;

/// Normalisation of the phase-invariant series.
///
/// `TraceNorm` uses the pure-state trace norm `2√(1 − |⟨+|−⟩|²)` per
/// sector, which tends to the Helstrom error as `n → ∞`. `Printed` keeps an
/// extra factor ½ in front of the sum; it is only provided for comparison
/// and does not reach the Helstrom limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SeriesForm {
    #[default]
    TraceNorm,
    Printed,
}

impl SeriesForm {
    pub fn name(self) -> &'static str {
        match self {
            SeriesForm::TraceNorm => "trace_norm",
            SeriesForm::Printed => "printed",
        }
    }

    fn sum_factor(self) -> f64 {
        match self {
            SeriesForm::TraceNorm => 1.0,
            SeriesForm::Printed => 0.5,
        }
    }
}

/// Truncated Poisson distribution `𝔭(m; μ) = e^{−|μ|²} |μ|^{2m} / m!`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWeights {
    /// `|μ|²`.
    pub mean_sq: f64,
    pub weights: Vec<f64>,
    /// Upper bound on the mass beyond the last stored weight.
    pub tail_bound: f64,
}

impl PoissonWeights {
    /// Accumulates weights until both the current weight drops below `1e-15`
    /// and the captured mass exceeds `1 − 1e-12` (past the mode), capping the
    /// index at `max(50, 10|μ|²)`.
    pub fn new(mean_sq: f64) -> Result<Self> {
        if !(mean_sq >= 0.0 && mean_sq.is_finite()) {
            return Err(invalid(format!("Poisson mean {mean_sq} must be finite and >= 0")));
        }
        let cap = 50usize.max((10.0 * mean_sq).ceil() as usize);
        let mut weights = Vec::new();
        let mut mass = CompensatedSum::new();
        for m in 0..=cap {
            let w = poisson_pmf(m as u64, mean_sq);
            weights.push(w);
            mass.add(w);
            if w < WEIGHT_FLOOR && mass.value() >= 1.0 - MASS_DEFICIT && m as f64 > mean_sq {
                break;
            }
        }
        let last = weights.len() - 1;
        let last_w = weights[last];
        // Past the mode the ratio of consecutive weights is at most
        // mean/(M+1), so the tail is dominated by a geometric series.
        let ratio = mean_sq / (last as f64 + 1.0);
        let geometric = if ratio < 1.0 { last_w * ratio / (1.0 - ratio) } else { f64::INFINITY };
        let tail_bound = geometric.max(1.0 - mass.value()).max(0.0);
        Ok(Self { mean_sq, weights, tail_bound })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }
}

/// Single Poisson probability, evaluated in log space.
pub fn poisson_pmf(m: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    (m as f64 * mean.ln() - mean - crate::numerics::special::ln_factorial(m)).exp()
}

/// Rice density of `|α|` with scale `σ` and offset `x_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicePrior {
    pub sigma: f64,
    pub x_c: f64,
}

impl RicePrior {
    pub fn new(sigma: f64, x_c: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("Rice sigma {sigma} must be > 0")));
        }
        if !(x_c >= 0.0 && x_c.is_finite()) {
            return Err(invalid(format!("Rice offset {x_c} must be >= 0")));
        }
        Ok(Self { sigma, x_c })
    }

    /// `p(r) = r/σ² · exp(−(r² + x_c²)/(2σ²)) · I₀(r x_c/σ²)`, evaluated with
    /// the scaled Bessel function so narrow priors do not overflow.
    pub fn density(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        let s2 = self.sigma * self.sigma;
        let d = r - self.x_c;
        r / s2 * (-d * d / (2.0 * s2)).exp() * bessel_i0e(r * self.x_c / s2)
    }

    /// Integration window `[max(0, x_c − 10σ), x_c + 10σ]`.
    pub fn support(&self) -> (f64, f64) {
        ((self.x_c - 10.0 * self.sigma).max(0.0), self.x_c + 10.0 * self.sigma)
    }

    /// `∫ p(r) g(r) dr` over [`RicePrior::support`].
    pub fn expectation<F: FnMut(f64) -> f64>(&self, mut g: F, tol: Tolerance) -> Result<f64> {
        let (lo, hi) = self.support();
        Ok(integrate(|r| self.density(r) * g(r), lo, hi, tol)?.value)
    }
}

/// Optimal success probability for two known coherent states with priors
/// `p1`, `p2`: `½(1 + √(1 − 4p₁p₂ e^{−|α₁−α₂|²}))`.
pub fn helstrom_success(p1: f64, p2: f64, a1: ComplexAmplitude, a2: ComplexAmplitude) -> Result<f64> {
    check_priors(p1, p2)?;
    let overlap = overlap_modulus_sq(a1, a2);
    Ok(0.5 * (1.0 + (1.0 - 4.0 * p1 * p2 * overlap).max(0.0).sqrt()))
}

/// Helstrom error for `|±α⟩` at flat priors, `½(1 − √(1 − e^{−4|α|²}))`.
pub fn helstrom_error_symmetric(alpha_abs_sq: f64) -> f64 {
    0.5 * (1.0 - (-(-4.0 * alpha_abs_sq).exp_m1()).sqrt())
}

fn check_abs_sq(alpha_abs_sq: f64) -> Result<()> {
    if alpha_abs_sq >= 0.0 && alpha_abs_sq.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("|alpha|^2 = {alpha_abs_sq} must be finite and >= 0")))
    }
}

/// `√(1 − ((n−1)/(n+1))^{2m})` without cancellation for large `n`.
fn sector_distinguishability(n: u32, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if n == 1 {
        return 1.0;
    }
    let ln_ratio = (-2.0 / (f64::from(n) + 1.0)).ln_1p();
    (-(2.0 * m as f64 * ln_ratio).exp_m1()).sqrt()
}

/// Minimum error of any phase-invariant classifier with `n` training
/// copies of `|α⟩` (flat priors):
/// `½(1 − Σ_m 𝔭(m; √(n+1)α) √(1 − ((n−1)/(n+1))^{2m}))`.
pub fn mec_optimal_error(n: u32, alpha_abs_sq: f64) -> Result<f64> {
    mec_optimal_error_with(n, alpha_abs_sq, SeriesForm::TraceNorm)
}

pub fn mec_optimal_error_with(n: u32, alpha_abs_sq: f64, form: SeriesForm) -> Result<f64> {
    if n == 0 {
        return Err(invalid("phase-invariant bound needs n >= 1"));
    }
    check_abs_sq(alpha_abs_sq)?;
    let weights = PoissonWeights::new((f64::from(n) + 1.0) * alpha_abs_sq)?;
    let sum: CompensatedSum = weights
        .weights
        .iter()
        .enumerate()
        .map(|(m, w)| w * sector_distinguishability(n, m))
        .collect();
    Ok(0.5 * (1.0 - form.sum_factor() * sum.value()))
}

/// Large-`n` expansion of [`mec_optimal_error`]:
/// `½[1 − (√(1−e^{−4|α|²}) − (1/n)·2|α|²e^{−4|α|²}/(1−e^{−4|α|²})^{3/2})]`,
/// accurate to `O(1/n²)`.
pub fn mec_optimal_error_asymptotic(n: u32, alpha_abs_sq: f64) -> Result<f64> {
    mec_optimal_error_asymptotic_with(n, alpha_abs_sq, SeriesForm::TraceNorm)
}

pub fn mec_optimal_error_asymptotic_with(n: u32, alpha_abs_sq: f64, form: SeriesForm) -> Result<f64> {
    if n < 2 {
        return Err(invalid("asymptotic expansion needs n >= 2"));
    }
    check_abs_sq(alpha_abs_sq)?;
    if alpha_abs_sq == 0.0 {
        return Err(invalid("asymptotic expansion is singular at alpha = 0"));
    }
    let e = (-4.0 * alpha_abs_sq).exp();
    let one_minus = -(-4.0 * alpha_abs_sq).exp_m1();
    let correction = 2.0 * alpha_abs_sq * e / one_minus.powf(1.5) / f64::from(n);
    Ok(0.5 * (1.0 - form.sum_factor() * (one_minus.sqrt() - correction)))
}

/// Prior-averaged photon-number distribution
/// `p̄(m) = ∫ p(r) 𝔭(m; √(n+1) r) dr`, truncated where the Poisson series at
/// the upper edge of the prior support is truncated.
pub fn averaged_photon_distribution(n: u32, prior: &RicePrior) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("phase-invariant bound needs n >= 1"));
    }
    let scale = f64::from(n) + 1.0;
    let (_, hi) = prior.support();
    let len = PoissonWeights::new(scale * hi * hi)?.len();
    (0..len as u64)
        .map(|m| prior.expectation(|r| poisson_pmf(m, scale * r * r), Tolerance::absolute(PRIOR_QUAD_TOL)))
        .collect()
}

/// [`mec_optimal_error`] with `|α|` drawn from a Rice prior and a uniform
/// phase.
pub fn mec_optimal_error_with_prior(n: u32, prior: &RicePrior) -> Result<f64> {
    mec_optimal_error_with_prior_form(n, prior, SeriesForm::TraceNorm)
}

pub fn mec_optimal_error_with_prior_form(n: u32, prior: &RicePrior, form: SeriesForm) -> Result<f64> {
    let averaged = averaged_photon_distribution(n, prior)?;
    let sum: CompensatedSum = averaged
        .iter()
        .enumerate()
        .map(|(m, p)| p * sector_distinguishability(n, m))
        .collect();
    Ok(0.5 * (1.0 - form.sum_factor() * sum.value()))
}

/// The two unit vectors `|m,±⟩` of the total-photon-number-`m` sector,
/// expanded on `|n₁, m − n₁⟩` for `n₁ = 0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSector {
    pub m: u32,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl FockSector {
    /// Components `√C(m, n₁) · n^{n₁/2} (±1)^{n₂} / (n+1)^{m/2}`, built in
    /// log space.
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid("Fock sector needs n >= 1"));
        }
        if m > MAX_ORACLE_SECTOR {
            return Err(invalid(format!("sector m = {m} exceeds {MAX_ORACLE_SECTOR}")));
        }
        let ln_n = f64::from(n).ln();
        let ln_np1 = (f64::from(n) + 1.0).ln();
        let mut plus = Vec::with_capacity(m as usize + 1);
        let mut minus = Vec::with_capacity(m as usize + 1);
        for n1 in 0..=m {
            let n2 = m - n1;
            let ln_c = 0.5 * ln_binomial(u64::from(m), u64::from(n1)) + 0.5 * f64::from(n1) * ln_n
                - 0.5 * f64::from(m) * ln_np1;
            let c = ln_c.exp();
            plus.push(c);
            minus.push(if n2 % 2 == 0 { c } else { -c });
        }
        Ok(Self { m, plus, minus })
    }

    pub fn dim(&self) -> usize {
        self.plus.len()
    }

    /// Gram matrix `[[⟨+|+⟩, ⟨+|−⟩], [⟨−|+⟩, ⟨−|−⟩]]` from the explicit
    /// components.
    pub fn gram(&self) -> [[f64; 2]; 2] {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect::<CompensatedSum>().value();
        let pm = dot(&self.plus, &self.minus);
        [[dot(&self.plus, &self.plus), pm], [pm, dot(&self.minus, &self.minus)]]
    }

    /// Trace norm of `w(|+⟩⟨+| − |−⟩⟨−|)` from the eigenvalues of the 2×2
    /// matrix `diag(w, −w)·G`, which shares the nonzero spectrum of the
    /// rank-2 operator.
    pub fn weighted_trace_norm(&self, w: f64) -> f64 {
        let g = self.gram();
        let trace = w * (g[0][0] - g[1][1]);
        let det = -w * w * (g[0][0] * g[1][1] - g[0][1] * g[1][0]);
        let disc = (0.25 * trace * trace - det).max(0.0).sqrt();
        let l1 = 0.5 * trace + disc;
        let l2 = 0.5 * trace - disc;
        l1.abs() + l2.abs()
    }
}

/// Trace norms `‖Π_m(ρ₊ − ρ₋)Π_m‖₁` for `m = 0..=m_max`, from explicit
/// sector vectors. Half their sum enters the error as
/// `½(1 − ½ Σ_m ‖·‖₁)`.
pub fn sector_trace_norm_oracle(n: u32, alpha: ComplexAmplitude, m_max: u32) -> Result<Vec<f64>> {
    if m_max > MAX_ORACLE_SECTOR {
        return Err(invalid(format!("m_max = {m_max} exceeds {MAX_ORACLE_SECTOR}")));
    }
    let mean = (f64::from(n) + 1.0) * alpha.abs_sq();
    (0..=m_max)
        .map(|m| {
            let sector = FockSector::new(n, m)?;
            Ok(sector.weighted_trace_norm(poisson_pmf(u64::from(m), mean)))
        })
        .collect()
}

/// Phase-invariant optimal error rebuilt from the sector oracle, keeping
/// sectors until the Poisson tail drops below `1e-15`.
pub fn mec_optimal_error_oracle(n: u32, alpha: ComplexAmplitude) -> Result<f64> {
    let m_max = oracle_sector_count(n, alpha.abs_sq(), 1e-15)?;
    let norms = sector_trace_norm_oracle(n, alpha, m_max)?;
    Ok(0.5 * (1.0 - 0.5 * norms.into_iter().collect::<CompensatedSum>().value()))
}

/// Smallest sector count whose Poisson tail is below `tail`, used to size
/// the oracle.
pub fn oracle_sector_count(n: u32, alpha_abs_sq: f64, tail: f64) -> Result<u32> {
    let mean = (f64::from(n) + 1.0) * alpha_abs_sq;
    let mut mass = CompensatedSum::new();
    for m in 0..=MAX_ORACLE_SECTOR {
        mass.add(poisson_pmf(u64::from(m), mean));
        if 1.0 - mass.value() < tail {
            return Ok(m);
        }
    }
    Err(Error::InvalidArgument(format!("Poisson tail above {tail} beyond m = {MAX_ORACLE_SECTOR}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(x: f64) -> ComplexAmplitude {
        ComplexAmplitude::real(x)
    }

    #[test]
    fn helstrom_examples() {
        assert_eq!(helstrom_success(0.5, 0.5, a(0.3), a(0.3)).unwrap(), 0.5);
        assert_eq!(helstrom_success(1.0, 0.0, a(0.3), a(-0.3)).unwrap(), 1.0);
        let v = helstrom_success(0.5, 0.5, a(0.25), a(-0.25)).unwrap();
        assert!((v - 0.735_159_104_080_936_6).abs() < 1e-15);
        assert!(matches!(helstrom_success(0.5, 0.6, a(0.1), a(0.2)), Err(Error::PriorsNotNormalized { .. })));
    }

    #[test]
    fn poisson_weights_invariants() {
        for mean in [0.0, 1e-3, 0.5, 3.0, 40.0, 625.0, 2000.0] {
            let w = PoissonWeights::new(mean).unwrap();
            let mass = w.mass();
            assert!(mass <= 1.0 + 1e-14, "mean {mean}: mass {mass}");
            assert!(mass + w.tail_bound >= 1.0 - 1e-15);
            assert!(w.tail_bound <= 1e-12, "mean {mean}: tail {}", w.tail_bound);
            for (m, x) in w.weights.iter().enumerate() {
                let direct = poisson_pmf(m as u64, mean);
                assert!((x - direct).abs() <= 1e-12 * direct.max(1e-300) + 1e-300, "mean {mean} m {m}");
            }
        }
        assert!(PoissonWeights::new(-1.0).is_err());
    }

    #[test]
    fn n1_collapses_to_vacuum_term() {
        let v = mec_optimal_error(1, 0.25).unwrap();
        assert!((v - 0.303_265_329_856_316_7).abs() < 1e-12);
        for a2 in [0.01, 0.3, 1.7] {
            assert!((mec_optimal_error(1, a2).unwrap() - 0.5 * (-2.0 * a2).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn series_matches_high_precision_reference() {
        // 30-digit reference sums.
        let cases = [
            (2, 0.0625, 0.419_004_956_489_255_86),
            (3, 0.390625, 0.131_385_505_124_476_6),
            (5, 1.0, 0.009_962_114_616_904_328),
            (10, 0.0625, 0.342_656_689_901_711_37),
            (100, 0.0625, 0.270_016_944_735_028_7),
        ];
        for (n, a2, expected) in cases {
            let v = mec_optimal_error(n, a2).unwrap();
            assert!((v - expected).abs() < 1e-13, "n={n} a2={a2}: {v} vs {expected}");
        }
    }

    #[test]
    fn zero_amplitude_is_coin_flip() {
        for n in [1, 2, 7, 1000] {
            assert_eq!(mec_optimal_error(n, 0.0).unwrap(), 0.5);
        }
    }

    #[test]
    fn large_n_approaches_helstrom() {
        let v = mec_optimal_error(10_000, 0.0625).unwrap();
        assert!((v - 0.264_840_895_919_063_4).abs() < 1e-3);
        let literal = mec_optimal_error_with(10_000, 0.0625, SeriesForm::Printed).unwrap();
        assert!((literal - 0.5 * (1.0 - 0.5 * (1.0 - (-0.25f64).exp()).sqrt())).abs() < 1e-3);
    }

    #[test]
    fn asymptotic_correction_scales_as_one_over_n() {
        let h = helstrom_error_symmetric(0.25);
        let c100 = mec_optimal_error_asymptotic(100, 0.25).unwrap() - h;
        let c200 = mec_optimal_error_asymptotic(200, 0.25).unwrap() - h;
        assert!(c100 > 0.0);
        assert!((c100 / c200 - 2.0).abs() < 0.1);
        assert!(mec_optimal_error_asymptotic(10, 0.0).is_err());
        assert!(mec_optimal_error_asymptotic(1, 0.2).is_err());
    }

    #[test]
    fn sector_vectors_and_overlap() {
        for n in [1u32, 2, 3, 7, 20] {
            for m in [0u32, 1, 2, 5, 17, 60] {
                let s = FockSector::new(n, m).unwrap();
                assert_eq!(s.dim(), m as usize + 1);
                let g = s.gram();
                assert!((g[0][0] - 1.0).abs() < 1e-12 && (g[1][1] - 1.0).abs() < 1e-12);
                let expected = ((f64::from(n) - 1.0) / (f64::from(n) + 1.0)).powi(m as i32);
                assert!((g[0][1] - expected).abs() < 1e-10, "n={n} m={m}");
            }
        }
        assert!(FockSector::new(2, 61).is_err());
    }

    #[test]
    fn oracle_examples() {
        let norms = sector_trace_norm_oracle(3, a(0.5), 4).unwrap();
        assert!(norms[0].abs() < 1e-15);
        assert!((norms[2] - 0.356_197_737_267_271_8).abs() < 1e-12);
        let n1 = sector_trace_norm_oracle(1, a(0.7), 10).unwrap();
        for (m, t) in n1.iter().enumerate().skip(1) {
            let p = poisson_pmf(m as u64, 2.0 * 0.49);
            assert!((t - 2.0 * p).abs() < 1e-14);
        }
    }

    #[test]
    fn rice_rayleigh_average_n1() {
        for sigma in [0.1, 0.3, 0.8] {
            let prior = RicePrior::new(sigma, 0.0).unwrap();
            let v = mec_optimal_error_with_prior(1, &prior).unwrap();
            let exact = 0.5 / (1.0 + 4.0 * sigma * sigma);
            assert!((v - exact).abs() < 1e-9, "sigma {sigma}: {v} vs {exact}");
        }
    }

    #[test]
    fn rice_density_normalised() {
        for (sigma, x_c) in [(0.1, 0.0), (0.1, 0.5), (0.3, 1.2), (1e-4, 0.625), (0.05, 3.0)] {
            let prior = RicePrior::new(sigma, x_c).unwrap();
            let mass = prior.expectation(|_| 1.0, Tolerance::absolute(1e-12)).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "sigma {sigma} x_c {x_c}: {mass}");
        }
        assert!(RicePrior::new(0.0, 1.0).is_err());
        assert!(RicePrior::new(0.1, -1.0).is_err());
    }

    #[test]
    fn point_mass_prior_matches_fixed_amplitude() {
        for (n, x) in [(1u32, 0.25), (4, 0.625), (8, 1.0)] {
            let prior = RicePrior::new(1e-4, x).unwrap();
            let averaged = mec_optimal_error_with_prior(n, &prior).unwrap();
            let fixed = mec_optimal_error(n, x * x).unwrap();
            assert!((averaged - fixed).abs() < 1e-4, "n={n}: {averaged} vs {fixed}");
        }
    }
}
