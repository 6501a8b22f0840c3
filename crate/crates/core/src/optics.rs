//! Coherent-amplitude algebra and the linear-optics maps that reduce the
//! general two-class problem to the symmetric one.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Complex amplitude `α` of a coherent state `|α⟩`. Mean photon number is
/// `|α|²`. Both components are finite.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    re: f64,
    im: f64,
}

impl ComplexAmplitude {
    pub const ZERO: Self = Self { re: 0.0, im: 0.0 };

    /// Panics on non-finite components; see [`ComplexAmplitude::try_new`].
    pub fn new(re: f64, im: f64) -> Self {
        Self::try_new(re, im).expect("amplitude components must be finite")
    }

    pub fn try_new(re: f64, im: f64) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(Self { re, im })
        } else {
            Err(invalid(format!("non-finite amplitude ({re}, {im})")))
        }
    }

    pub fn real(re: f64) -> Self {
        Self::new(re, 0.0)
    }

    pub fn from_polar(r: f64, phase: f64) -> Self {
        let c = Complex64::from_polar(r, phase);
        Self::new(c.re, c.im)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    /// Mean photon number `|α|²`.
    pub fn abs_sq(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.re * k, self.im * k)
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for ComplexAmplitude {
    fn from(c: Complex64) -> Self {
        Self::new(c.re, c.im)
    }
}

impl From<ComplexAmplitude> for Complex64 {
    fn from(a: ComplexAmplitude) -> Self {
        a.as_complex()
    }
}

impl fmt::Display for ComplexAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.re, self.im)
    }
}

impl Add for ComplexAmplitude {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for ComplexAmplitude {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for ComplexAmplitude {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Mul for ComplexAmplitude {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        (self.as_complex() * rhs.as_complex()).into()
    }
}

impl Mul<f64> for ComplexAmplitude {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        self.scale(k)
    }
}

/// Checks `p` is a probability.
pub(crate) fn check_probability(p: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} is not a probability")))
    }
}

/// Checks a prior pair sums to one within `1e-15` (plus one ulp of slack).
pub(crate) fn check_priors(p1: f64, p2: f64) -> Result<()> {
    check_probability(p1, "p1")?;
    check_probability(p2, "p2")?;
    if (p1 + p2 - 1.0).abs() > 1e-15 + f64::EPSILON {
        return Err(Error::PriorsNotNormalized { p1, p2 });
    }
    Ok(())
}

/// The general problem: `n` copies each of `|α₁⟩`, `|α₂⟩` and a test state
/// `|δ⟩` equal to one of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralProblem {
    pub alpha1: ComplexAmplitude,
    pub alpha2: ComplexAmplitude,
    pub n: u32,
    /// Which class the test state belongs to; hidden from receivers.
    pub delta_is_class1: bool,
}

impl GeneralProblem {
    pub fn new(alpha1: ComplexAmplitude, alpha2: ComplexAmplitude, n: u32, delta_is_class1: bool) -> Result<Self> {
        if n == 0 {
            return Err(invalid("general problem needs n >= 1 copies per class"));
        }
        Ok(Self { alpha1, alpha2, n, delta_is_class1 })
    }

    pub fn delta(&self) -> ComplexAmplitude {
        if self.delta_is_class1 {
            self.alpha1
        } else {
            self.alpha2
        }
    }
}

/// Symmetric instance: `n` copies of `|α⟩` and a test state `|±α⟩` with
/// priors `p₊`, `p₋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricProblem {
    pub alpha: ComplexAmplitude,
    pub n: u32,
    pub p_plus: f64,
    pub p_minus: f64,
}

impl SymmetricProblem {
    pub fn new(alpha: ComplexAmplitude, n: u32, p_plus: f64, p_minus: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("symmetric problem needs n >= 1 copies"));
        }
        check_priors(p_plus, p_minus)?;
        Ok(Self { alpha, n, p_plus, p_minus })
    }

    /// Flat priors.
    pub fn flat(alpha: ComplexAmplitude, n: u32) -> Result<Self> {
        Self::new(alpha, n, 0.5, 0.5)
    }
}

/// Real orthogonal 3×3 scattering matrix of a 3-port beam splitter,
/// acting on column vectors of mode amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix3 {
    pub entries: [[f64; 3]; 3],
}

impl ScatteringMatrix3 {
    pub fn apply(&self, v: [ComplexAmplitude; 3]) -> [ComplexAmplitude; 3] {
        let mut out = [ComplexAmplitude::ZERO; 3];
        for (row, o) in self.entries.iter().zip(out.iter_mut()) {
            let c: Complex64 = row.iter().zip(v.iter()).map(|(s, a)| a.as_complex() * *s).sum();
            *o = c.into();
        }
        out
    }

    /// Largest entry of `|SᵀS − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let s = &self.entries;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| s[k][i] * s[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// `|⟨a|b⟩|² = exp(−|a − b|²)`.
pub fn overlap_modulus_sq(a: ComplexAmplitude, b: ComplexAmplitude) -> f64 {
    (-(a - b).abs_sq()).exp()
}

/// Concentrator gate: `m` copies of `|a⟩` become `|√m a⟩` on one mode
/// (the other `m − 1` modes are left in vacuum).
pub fn concentrate(m: u32, a: ComplexAmplitude) -> Result<ComplexAmplitude> {
    if m == 0 {
        return Err(invalid("concentrator needs at least one copy"));
    }
    Ok(a.scale(f64::from(m).sqrt()))
}

/// Scattering matrix that maps `(√n α₁, √n α₂, δ)` to the difference mode,
/// the test mode and the residual mode.
pub fn scattering_matrix(n: u32) -> Result<ScatteringMatrix3> {
    if n == 0 {
        return Err(invalid("scattering matrix needs n >= 1"));
    }
    let n = f64::from(n);
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let d = 2.0 * n + 1.0;
    Ok(ScatteringMatrix3 {
        entries: [
            [r2, -r2, 0.0],
            [1.0 / (4.0 * n + 2.0).sqrt(), 1.0 / (4.0 * n + 2.0).sqrt(), -(2.0 * n / d).sqrt()],
            [(n / d).sqrt(), (n / d).sqrt(), (1.0 / d).sqrt()],
        ],
    })
}

/// Result of [`reduce_to_symmetric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    /// Symmetric instance with amplitude `α′` and `2n + 1` training copies
    /// (obtained by de-concentrating the first output mode).
    pub problem: SymmetricProblem,
    /// Test-mode amplitude `δ′`, equal to `−α′` when `δ = α₁` and `+α′`
    /// when `δ = α₂`.
    pub test_mode: ComplexAmplitude,
    /// Third output mode `(δ + n(α₁ + α₂))/√(2n+1)`; discarded by the
    /// protocol, reported for auditing.
    pub residual: ComplexAmplitude,
    /// Raw output of the scattering map.
    pub modes: [ComplexAmplitude; 3],
}

impl Reduction {
    /// Class label of the test state: `true` for class 1 (`δ′ = −α′`).
    pub fn is_class1(&self) -> bool {
        let a = self.problem.alpha.as_complex();
        let d = self.test_mode.as_complex();
        (d * a.conj()).re < 0.0
    }
}

/// Concentrates both training sets, applies [`scattering_matrix`] and
/// returns the symmetric instance with flat priors.
pub fn reduce_to_symmetric(p: &GeneralProblem) -> Result<Reduction> {
    let s = scattering_matrix(p.n)?;
    let input = [concentrate(p.n, p.alpha1)?, concentrate(p.n, p.alpha2)?, p.delta()];
    let modes = s.apply(input);
    let copies = 2 * p.n + 1;
    let alpha_prime = modes[0].scale(1.0 / f64::from(copies).sqrt());
    Ok(Reduction {
        problem: SymmetricProblem::flat(alpha_prime, copies)?,
        test_mode: modes[1],
        residual: modes[2],
        modes,
    })
}
