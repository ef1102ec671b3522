//! Roots of the locus on the vertical boundary `Re(s) = σ₀`.
//!
//! Along the boundary the locus equation splits into a magnitude condition
//! `K(ω) ≤ ln k_max` and a phase condition `φ(ω) = (2l+1)π`. Both functions
//! are split into monotone pieces at the non-negative real roots of the
//! numerators of their derivatives, after which every crossing is isolated
//! by bisection.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::wrap_pi;
use crate::plant::{pairwise_sum, GainSign, Plant, PlantError};
use crate::poly::RealPolynomial;

pub const TOL_BOUNDARY: f64 = 1e-9;
pub const TOL_DIRECTION: f64 = 1e-9;
pub const TOL_BISECT: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("{kind} {location} lies on the boundary Re(s) = {sigma0}")]
    PoleOrZeroOnBoundary {
        kind: &'static str,
        location: Complex64,
        sigma0: f64,
    },
    #[error(
        "bi-proper plant: the controller gain must be bounded, k_max = {kmax} must stay below e^(h*sigma0)/|G(inf)| = {bound}"
    )]
    BiProperGainCapViolated { kmax: f64, bound: f64 },
    #[error("crossing at omega = {omega} is tangential (phi' = {slope}); direction is ill-posed")]
    DegenerateCrossing { omega: f64, slope: f64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("could not bound the magnitude intervals (K stays below ln k_max up to omega = {0})")]
    UnboundedMagnitude(f64),
    #[error(transparent)]
    Plant(#[from] PlantError),
}

/// The half-plane `Re(s) ≥ σ₀` together with the gain cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub sigma0: f64,
    pub kmax: f64,
}

impl RegionSpec {
    pub fn new(sigma0: f64, kmax: f64) -> Result<Self, BoundaryError> {
        if !sigma0.is_finite() {
            return Err(BoundaryError::InvalidRegion("sigma0 must be finite".into()));
        }
        if !(kmax > 0.0 && kmax.is_finite()) {
            return Err(BoundaryError::InvalidRegion(format!(
                "kmax must be positive and finite, got {kmax}"
            )));
        }
        Ok(Self { sigma0, kmax })
    }

    pub fn lnkmax(&self) -> f64 {
        self.kmax.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingDirection {
    Inward,
    Outward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCrossing {
    pub omega: f64,
    /// `ln|k|` at the crossing.
    pub kval: f64,
    /// `|k|`.
    pub k: f64,
    pub direction: CrossingDirection,
    pub sign: GainSign,
    /// Index of the phase line `(2l+1)π` (positive gain) or `2lπ` (negative).
    pub line: i64,
}

impl BoundaryCrossing {
    pub fn location(&self, sigma0: f64) -> Complex64 {
        Complex64::new(sigma0, self.omega)
    }
}

/// Crossings grouped by direction, each list sorted by `kval`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossingSet {
    pub inward: Vec<BoundaryCrossing>,
    pub outward: Vec<BoundaryCrossing>,
}

impl CrossingSet {
    pub fn len(&self) -> usize {
        self.inward.len() + self.outward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &BoundaryCrossing> {
        self.inward.iter().chain(self.outward.iter())
    }

    fn push(&mut self, c: BoundaryCrossing) {
        match c.direction {
            CrossingDirection::Inward => self.inward.push(c),
            CrossingDirection::Outward => self.outward.push(c),
        }
    }

    fn sort(&mut self) {
        self.inward.sort_by(|a, b| a.kval.total_cmp(&b.kval));
        self.outward.sort_by(|a, b| a.kval.total_cmp(&b.kval));
    }

    pub fn extend(&mut self, other: CrossingSet) {
        self.inward.extend(other.inward);
        self.outward.extend(other.outward);
        self.sort();
    }
}

/// Closed interval `[lo, hi]` of boundary frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaInterval {
    pub lo: f64,
    pub hi: f64,
}

/// `K`, `φ` and their derivatives along `σ₀ + jω`, with the polynomials whose
/// non-negative roots are the critical points of `K` and `φ`.
#[derive(Debug, Clone)]
pub struct BoundaryFunctions {
    plant: Plant,
    sigma0: f64,
    /// `σ₀ - σ_z` for each zero.
    dsz: Vec<f64>,
    /// `σ₀ - σ_p` for each pole.
    dsp: Vec<f64>,
    phi0: f64,
    kprime_poly: RealPolynomial,
    phiprime_poly: RealPolynomial,
}

impl BoundaryFunctions {
    pub fn new(plant: &Plant, region: &RegionSpec) -> Result<Self, BoundaryError> {
        let sigma0 = region.sigma0;
        let on_boundary = |kind, roots: &[Complex64]| {
            roots
                .iter()
                .find(|r| (r.re - sigma0).abs() <= TOL_BOUNDARY)
                .map(|r| BoundaryError::PoleOrZeroOnBoundary {
                    kind,
                    location: *r,
                    sigma0,
                })
        };
        if let Some(e) = on_boundary("pole", plant.poles()).or(on_boundary("zero", plant.zeros())) {
            return Err(e);
        }
        if plant.is_biproper() {
            let ln_bound = plant.delay() * sigma0 - plant.alpha().abs().ln();
            if region.lnkmax() >= ln_bound {
                return Err(BoundaryError::BiProperGainCapViolated {
                    kmax: region.kmax,
                    bound: ln_bound.exp(),
                });
            }
        }

        let dsz: Vec<f64> = plant.zeros().iter().map(|z| sigma0 - z.re).collect();
        let dsp: Vec<f64> = plant.poles().iter().map(|p| sigma0 - p.re).collect();
        let (kprime_poly, phiprime_poly) = critical_polynomials(plant, &dsz, &dsp);

        let mut bf = Self {
            plant: plant.clone(),
            sigma0,
            dsz,
            dsp,
            phi0: 0.0,
            kprime_poly,
            phiprime_poly,
        };
        let at_real_axis = plant.log_eval(Complex64::new(sigma0, 0.0))?;
        let mut phi0 = wrap_pi(at_real_axis.phase) - bf.phi1(0.0);
        let nearest = (phi0 / PI).round() * PI;
        if (phi0 - nearest).abs() <= 1e-9 {
            phi0 = nearest;
        }
        bf.phi0 = phi0;
        Ok(bf)
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn delta_sigma_zeros(&self) -> &[f64] {
        &self.dsz
    }

    pub fn delta_sigma_poles(&self) -> &[f64] {
        &self.dsp
    }

    /// Numerator of `K'(ω)` (same sign, positive denominator).
    pub fn kprime_poly(&self) -> &RealPolynomial {
        &self.kprime_poly
    }

    /// Numerator of `φ'(ω)` (same sign, positive denominator).
    pub fn phiprime_poly(&self) -> &RealPolynomial {
        &self.phiprime_poly
    }

    fn point(&self, omega: f64) -> Complex64 {
        Complex64::new(self.sigma0, omega)
    }

    /// `K(ω) = hσ₀ - ln|G(σ₀ + jω)|`.
    pub fn k_of(&self, omega: f64) -> f64 {
        let s = self.point(omega);
        let p = &self.plant;
        p.delay() * self.sigma0 - p.alpha().abs().ln()
            + pairwise_sum(p.poles(), |r| (s - r).norm().ln())
            - pairwise_sum(p.zeros(), |r| (s - r).norm().ln())
    }

    pub fn kprime_of(&self, omega: f64) -> f64 {
        let p = &self.plant;
        let term = |r: &Complex64, ds: f64| {
            let dw = omega - r.im;
            dw / (ds * ds + dw * dw)
        };
        let poles: f64 = p.poles().iter().zip(&self.dsp).map(|(r, ds)| term(r, *ds)).sum();
        let zeros: f64 = p.zeros().iter().zip(&self.dsz).map(|(r, ds)| term(r, *ds)).sum();
        poles - zeros
    }

    /// `φ₁(ω)`: single-argument arctangents, continuous because no `Δσ` is zero.
    fn phi1(&self, omega: f64) -> f64 {
        let s0 = self.sigma0;
        let p = &self.plant;
        let term = |r: Complex64| ((omega - r.im) / (s0 - r.re)).atan();
        pairwise_sum(p.zeros(), term) - pairwise_sum(p.poles(), term) - p.delay() * omega
    }

    /// Continuous phase `φ(ω) = φ₀ + φ₁(ω)`.
    pub fn phi_of(&self, omega: f64) -> f64 {
        self.phi0 + self.phi1(omega)
    }

    pub fn phiprime_of(&self, omega: f64) -> f64 {
        let p = &self.plant;
        let term = |r: &Complex64, ds: f64| {
            let dw = omega - r.im;
            ds / (ds * ds + dw * dw)
        };
        let zeros: f64 = p.zeros().iter().zip(&self.dsz).map(|(r, ds)| term(r, *ds)).sum();
        let poles: f64 = p.poles().iter().zip(&self.dsp).map(|(r, ds)| term(r, *ds)).sum();
        zeros - poles - p.delay()
    }

    /// `{ω ≥ 0 : K(ω) ≤ ln k_max}` as a sorted union of disjoint closed intervals.
    pub fn magnitude_intervals(&self, region: &RegionSpec) -> Result<Vec<OmegaInterval>, BoundaryError> {
        let lnk = region.lnkmax();
        let crit = distinct_nonneg_roots(&self.kprime_poly);
        let cap = self.omega_cap(lnk, crit.last().copied().unwrap_or(0.0))?;

        let mut breaks = vec![0.0];
        breaks.extend(crit.iter().copied().filter(|c| *c > 0.0 && *c < cap));
        breaks.push(cap);

        let below = |w: f64| self.k_of(w) - lnk;
        let mut pieces: Vec<OmegaInterval> = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (below(a), below(b));
            let piece = match (fa <= 0.0, fb <= 0.0) {
                (true, true) => Some(OmegaInterval { lo: a, hi: b }),
                (false, false) => None,
                (true, false) => Some(OmegaInterval {
                    lo: a,
                    hi: bisect_inside(&below, a, b),
                }),
                (false, true) => Some(OmegaInterval {
                    lo: bisect_inside(&below, b, a),
                    hi: b,
                }),
            };
            if let Some(iv) = piece {
                match pieces.last_mut() {
                    Some(last) if iv.lo <= last.hi => last.hi = iv.hi,
                    _ => pieces.push(iv),
                }
            }
        }
        Ok(pieces)
    }

    /// A frequency beyond which `K` stays above `ln k_max` for good.
    fn omega_cap(&self, lnk: f64, last_crit: f64) -> Result<f64, BoundaryError> {
        let p = &self.plant;
        let margin = if p.is_biproper() {
            let limit = p.delay() * self.sigma0 - p.alpha().abs().ln();
            (0.5 * (limit - lnk)).min(1.0)
        } else {
            1.0
        };
        let radius = p
            .poles()
            .iter()
            .chain(p.zeros())
            .map(|r| r.norm())
            .fold(last_crit, f64::max);
        let mut cap = 1.0 + 2.0 * radius;
        for _ in 0..200 {
            if self.k_of(cap) > lnk + margin {
                return Ok(cap);
            }
            cap *= 2.0;
        }
        Err(BoundaryError::UnboundedMagnitude(cap))
    }

    /// Algorithm-1 crossings of the phase lines inside the magnitude intervals.
    pub fn boundary_crossings(
        &self,
        region: &RegionSpec,
        sign: GainSign,
    ) -> Result<CrossingSet, BoundaryError> {
        let intervals = self.magnitude_intervals(region)?;
        let crit = distinct_nonneg_roots(&self.phiprime_poly);
        let mut found: Vec<(f64, i64)> = Vec::new();
        for iv in &intervals {
            let mut breaks = vec![iv.lo];
            breaks.extend(crit.iter().copied().filter(|c| *c > iv.lo && *c < iv.hi));
            breaks.push(iv.hi);
            for w in breaks.windows(2) {
                for hit in self.piece_crossings(w[0], w[1], sign) {
                    let duplicate = found
                        .iter()
                        .any(|(om, l)| *l == hit.1 && (om - hit.0).abs() <= 10.0 * TOL_BISECT);
                    if !duplicate {
                        found.push(hit);
                    }
                }
            }
        }

        let lnk = region.lnkmax();
        let mut set = CrossingSet::default();
        for (omega, line) in found {
            let slope = self.phiprime_of(omega);
            if slope.abs() <= TOL_DIRECTION {
                return Err(BoundaryError::DegenerateCrossing { omega, slope });
            }
            let kval = self.k_of(omega).min(lnk);
            set.push(BoundaryCrossing {
                omega,
                kval,
                k: kval.exp(),
                direction: if slope < 0.0 {
                    CrossingDirection::Inward
                } else {
                    CrossingDirection::Outward
                },
                sign,
                line,
            });
        }
        set.sort();
        Ok(set)
    }

    /// Intersections of `φ` with the phase lines on one monotone piece.
    fn piece_crossings(&self, a: f64, b: f64, sign: GainSign) -> Vec<(f64, i64)> {
        let (fa, fb) = (self.phi_of(a), self.phi_of(b));
        let (lmin, lmax) = phase_line_range(fa.min(fb), fa.max(fb), sign);
        let mut out = Vec::new();
        for l in lmin..=lmax {
            let target = line_value(l, sign);
            let g = |w: f64| self.phi_of(w) - target;
            if let Some(w) = bisect_root(&g, a, b) {
                out.push((w, l));
            }
        }
        out
    }
}

/// `l`-range of phase lines met by a monotone piece with phase range
/// `[phi_min, phi_max]`: lines are `(2l+1)π` for positive gains, `2lπ` for
/// negative gains.
pub fn phase_line_range(phi_min: f64, phi_max: f64, sign: GainSign) -> (i64, i64) {
    let offset = offset_of(sign);
    let slack = 1e-12;
    let lmax = ((phi_max / PI - offset) / 2.0 + slack).floor() as i64;
    let lmin = ((phi_min / PI - offset) / 2.0 - slack).ceil() as i64;
    (lmin, lmax)
}

fn offset_of(sign: GainSign) -> f64 {
    match sign {
        GainSign::Positive => 1.0,
        GainSign::Negative => 0.0,
    }
}

fn line_value(l: i64, sign: GainSign) -> f64 {
    (2.0 * l as f64 + offset_of(sign)) * PI
}

fn distinct_nonneg_roots(p: &RealPolynomial) -> Vec<f64> {
    if p.degree() == 0 {
        return Vec::new();
    }
    let mut roots: Vec<f64> = p.nonneg_real_roots().into_iter().map(|(r, _)| r).collect();
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    roots
}

/// Bisection for the boundary of `{f ≤ 0}` between `inside` (`f ≤ 0`) and
/// `outside` (`f > 0`). Returns a point where `f ≤ 0`.
fn bisect_inside(f: &impl Fn(f64) -> f64, mut inside: f64, mut outside: f64) -> f64 {
    while (outside - inside).abs() > TOL_BISECT * (1.0 + inside.abs()) {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) <= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Root of a monotone `g` on `[a, b]`, or `None` if `g` keeps one sign.
fn bisect_root(g: &impl Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let (mut glo, ghi) = (g(lo), g(hi));
    let touch = 1e-12;
    if glo == 0.0 || (glo.abs() <= touch && glo.abs() <= ghi.abs()) {
        return Some(lo);
    }
    if ghi == 0.0 || ghi.abs() <= touch {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    while hi - lo > TOL_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Numerators of `K'` and `φ'` over the common positive denominator
/// `Γ_z(ω)Γ_p(ω)`.
fn critical_polynomials(plant: &Plant, dsz: &[f64], dsp: &[f64]) -> (RealPolynomial, RealPolynomial) {
    let gamma = |r: &Complex64, ds: f64| RealPolynomial::new(vec![ds * ds + r.im * r.im, -2.0 * r.im, 1.0]);
    let dw = |r: &Complex64| RealPolynomial::new(vec![-r.im, 1.0]);

    let gz: Vec<RealPolynomial> = plant.zeros().iter().zip(dsz).map(|(r, d)| gamma(r, *d)).collect();
    let gp: Vec<RealPolynomial> = plant.poles().iter().zip(dsp).map(|(r, d)| gamma(r, *d)).collect();
    let product = |v: &[RealPolynomial], skip: Option<usize>| {
        v.iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .fold(RealPolynomial::constant(1.0), |acc, (_, q)| &acc * q)
    };
    let gz_all = product(&gz, None);
    let gp_all = product(&gp, None);

    let mut kz = RealPolynomial::zero();
    let mut phz = RealPolynomial::zero();
    for (r, (z, ds)) in plant.zeros().iter().zip(dsz).enumerate() {
        let others = product(&gz, Some(r));
        kz = &kz + &(&dw(z) * &others);
        phz = &phz + &others.scale(*ds);
    }
    let mut kp = RealPolynomial::zero();
    let mut php = RealPolynomial::zero();
    for (i, (p, ds)) in plant.poles().iter().zip(dsp).enumerate() {
        let others = product(&gp, Some(i));
        kp = &kp + &(&dw(p) * &others);
        php = &php + &others.scale(*ds);
    }

    let kprime = &(&gz_all * &kp) - &(&gp_all * &kz);
    let both = &gz_all * &gp_all;
    let phiprime = &(&(&gp_all * &phz) - &(&gz_all * &php)) - &both.scale(plant.delay());
    (kprime, phiprime)
}
