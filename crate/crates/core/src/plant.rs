//! SISO dead-time plants `α·N(s)/D(s)·e^{-hs}` in zero-pole-gain form.
//!
//! Every evaluation works with logarithmic magnitude and summed phase
//! angles of the individual factors, so `e^{-hs}` and the products of
//! factors are never formed.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::angle::wrap_pi;
use crate::poly::{PolyError, RealPolynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("delay must be positive, got {0}")]
    NonPositiveDelay(f64),
    #[error("system gain must be nonzero")]
    ZeroGain,
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("improper plant: {zeros} zeros but only {poles} poles")]
    Improper { zeros: usize, poles: usize },
    #[error("numerator polynomial is zero")]
    ZeroNumerator,
    #[error("denominator polynomial is zero")]
    ZeroDenominator,
    #[error("{kind} {value} has no complex-conjugate partner")]
    NotConjugateClosed { kind: &'static str, value: Complex64 },
    #[error("evaluation point {0} coincides with a pole or zero")]
    Singular(Complex64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Relative distance below which a point counts as sitting on a pole/zero.
pub const TOL_SINGULAR: f64 = 1e-12;
const TOL_CONJUGATE: f64 = 1e-9;

/// Sign of the feedback gain a locus is computed for.
///
/// Positive gains solve `G(s)e^{-hs} = -1/k`, so the phase target is π;
/// negative gains put the target at 0. Magnitudes are always in `ln|k|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainSign {
    #[default]
    Positive,
    Negative,
}

impl GainSign {
    pub fn phase_target(self) -> f64 {
        match self {
            GainSign::Positive => PI,
            GainSign::Negative => 0.0,
        }
    }

    /// Signed gain for a log-magnitude `K = ln|k|`.
    pub fn gain(self, kval: f64) -> f64 {
        match self {
            GainSign::Positive => kval.exp(),
            GainSign::Negative => -kval.exp(),
        }
    }
}

/// `ln|G(s)e^{-hs}|` and its principal phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub lnmag: f64,
    /// In `(-π, π]`.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    alpha: f64,
    delay: f64,
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
}

impl Plant {
    /// Builds a plant from gain, delay, zeros and poles.
    ///
    /// Zeros and poles must each be closed under conjugation (within a
    /// relative `1e-9`); partners are snapped to exact conjugates and the
    /// lists are stored sorted with conjugate pairs adjacent.
    pub fn new(
        alpha: f64,
        delay: f64,
        zeros: Vec<Complex64>,
        poles: Vec<Complex64>,
    ) -> Result<Self, PlantError> {
        if !alpha.is_finite() {
            return Err(PlantError::NonFinite("alpha"));
        }
        if !delay.is_finite() {
            return Err(PlantError::NonFinite("delay"));
        }
        if delay <= 0.0 {
            return Err(PlantError::NonPositiveDelay(delay));
        }
        if alpha == 0.0 {
            return Err(PlantError::ZeroGain);
        }
        if zeros.len() > poles.len() {
            return Err(PlantError::Improper {
                zeros: zeros.len(),
                poles: poles.len(),
            });
        }
        Ok(Self {
            alpha,
            delay,
            zeros: canonical_roots(zeros, "zero")?,
            poles: canonical_roots(poles, "pole")?,
        })
    }

    /// Converts `num(s)/den(s)·e^{-hs}` (ascending coefficients) to zero-pole-gain form.
    pub fn from_coefficients(
        num: &RealPolynomial,
        den: &RealPolynomial,
        delay: f64,
    ) -> Result<Self, PlantError> {
        if num.is_zero() {
            return Err(PlantError::ZeroNumerator);
        }
        if den.is_zero() {
            return Err(PlantError::ZeroDenominator);
        }
        if num.degree() > den.degree() {
            return Err(PlantError::Improper {
                zeros: num.degree(),
                poles: den.degree(),
            });
        }
        if delay <= 0.0 {
            return Err(PlantError::NonPositiveDelay(delay));
        }
        let alpha = num.leading() / den.leading();
        let zeros = roots_of(num)?;
        let poles = roots_of(den)?;
        Self::new(alpha, delay, zeros, poles)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// `n = m`, so `G(∞) = α ≠ 0`.
    pub fn is_biproper(&self) -> bool {
        self.zeros.len() == self.poles.len()
    }

    /// Same zeros, poles and delay with a different gain.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, PlantError> {
        Self::new(alpha, self.delay, self.zeros.clone(), self.poles.clone())
    }

    /// Phase of the constant gain: 0 or π.
    pub fn alpha_phase(&self) -> f64 {
        if self.alpha < 0.0 {
            PI
        } else {
            0.0
        }
    }

    pub fn check_regular(&self, s: Complex64) -> Result<(), PlantError> {
        let tol = TOL_SINGULAR * (1.0 + s.norm());
        if self
            .zeros
            .iter()
            .chain(self.poles.iter())
            .any(|r| (s - r).norm() <= tol)
        {
            return Err(PlantError::Singular(s));
        }
        Ok(())
    }

    pub fn log_eval(&self, s: Complex64) -> Result<LogValue, PlantError> {
        self.check_regular(s)?;
        let lnmag = self.alpha.abs().ln()
            + pairwise_sum(&self.zeros, |z| (s - z).norm().ln())
            - pairwise_sum(&self.poles, |p| (s - p).norm().ln())
            - self.delay * s.re;
        let phase = self.alpha_phase() + self.factor_phase(s) - self.delay * s.im;
        Ok(LogValue {
            lnmag,
            phase: wrap_pi(phase),
        })
    }

    /// `Σ atan2` over zero factors minus the same over pole factors.
    pub(crate) fn factor_phase(&self, s: Complex64) -> f64 {
        pairwise_sum(&self.zeros, |z| (s - z).arg()) - pairwise_sum(&self.poles, |p| (s - p).arg())
    }

    /// `G'(s)/G(s) - h`.
    pub fn dlog_ratio(&self, s: Complex64) -> Result<Complex64, PlantError> {
        self.check_regular(s)?;
        let zs: Complex64 = self.zeros.iter().map(|z| (s - z).inv()).sum();
        let ps: Complex64 = self.poles.iter().map(|p| (s - p).inv()).sum();
        Ok(zs - ps - self.delay)
    }

    /// Monic numerator `Π(s - z_r)`.
    pub fn numerator(&self) -> RealPolynomial {
        RealPolynomial::from_conjugate_roots(&self.zeros)
    }

    /// Monic denominator `Π(s - p_i)`.
    pub fn denominator(&self) -> RealPolynomial {
        RealPolynomial::from_conjugate_roots(&self.poles)
    }

    /// `N'D - ND' - hND` with monic `N`, `D`. Its zeros are the zeros of
    /// `G'(s) - hG(s)`; the gain α is left out since it does not move them.
    pub fn branch_numerator(&self) -> RealPolynomial {
        let n = self.numerator();
        let d = self.denominator();
        let nd = &n * &d;
        &(&(&n.derivative() * &d) - &(&n * &d.derivative())) - &nd.scale(self.delay)
    }

    /// The positive gain `k` with `|k G(s) e^{-hs}| = 1`.
    pub fn gain_at(&self, s: Complex64) -> Result<f64, PlantError> {
        Ok((-self.log_eval(s)?.lnmag).exp())
    }
}

fn roots_of(p: &RealPolynomial) -> Result<Vec<Complex64>, PlantError> {
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    Ok(p.complex_roots()?.expanded())
}

/// Sums `f` over roots, adding each adjacent conjugate pair together first so
/// that symmetric contributions cancel exactly on the real axis.
pub(crate) fn pairwise_sum(roots: &[Complex64], f: impl Fn(Complex64) -> f64) -> f64 {
    let mut total = 0.0;
    let mut i = 0;
    while i < roots.len() {
        let r = roots[i];
        if r.im > 0.0 && i + 1 < roots.len() && roots[i + 1] == r.conj() {
            total += f(r) + f(roots[i + 1]);
            i += 2;
        } else {
            total += f(r);
            i += 1;
        }
    }
    total
}

fn canonical_roots(
    mut roots: Vec<Complex64>,
    kind: &'static str,
) -> Result<Vec<Complex64>, PlantError> {
    for r in roots.iter_mut() {
        if !r.re.is_finite() || !r.im.is_finite() {
            return Err(PlantError::NonFinite(kind));
        }
        // drop negative zeros so atan2 sees +0 on the real axis
        r.re += 0.0;
        r.im += 0.0;
    }
    let n = roots.len();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        roots[a]
            .re
            .total_cmp(&roots[b].re)
            .then(roots[b].im.total_cmp(&roots[a].im))
    });
    for &i in &order {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = roots[i];
        let tol = TOL_CONJUGATE * (1.0 + r.norm());
        if r.im.abs() <= tol {
            out.push(Complex64::new(r.re, 0.0));
            continue;
        }
        let partner = (0..n)
            .filter(|&j| !used[j] && roots[j].im * r.im < 0.0)
            .map(|j| (j, (roots[j] - r.conj()).norm()))
            .filter(|(_, d)| *d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, _)) => {
                used[j] = true;
                let upper = if r.im > 0.0 { r } else { r.conj() };
                out.push(upper);
                out.push(upper.conj());
            }
            None => {
                return Err(PlantError::NotConjugateClosed { kind, value: r });
            }
        }
    }
    // stable: keeps each (upper, lower) pair adjacent, even for repeated roots
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.abs().total_cmp(&b.im.abs())));
    Ok(out)
}
