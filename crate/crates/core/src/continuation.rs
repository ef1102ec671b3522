//! Predictor-corrector path following in `(σ, ω, K)` space, `K = ln|k|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::wrap_pi;
use crate::boundary::{BoundaryCrossing, BoundaryFunctions};
use crate::plant::{pairwise_sum, GainSign, Plant, PlantError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error("Jacobian is numerically singular (pivot ratio {0:e})")]
    SingularJacobian(f64),
    #[error("corrector did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("step length fell below the minimum {0:e}")]
    StepUnderflow(f64),
    #[error("pole {0} is repeated; use departure_angles")]
    RepeatedPole(Complex64),
    #[error("pole index {0} out of range")]
    PoleIndex(usize),
    #[error("crossing at omega = {omega} is tangential (phi' = {slope})")]
    DegenerateCrossing { omega: f64, slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub sigma: f64,
    pub omega: f64,
    pub kval: f64,
}

impl LocusPoint {
    pub fn new(sigma: f64, omega: f64, kval: f64) -> Self {
        Self { sigma, omega, kval }
    }

    pub fn from_s(s: Complex64, kval: f64) -> Self {
        Self::new(s.re, s.im, kval)
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.omega)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.sigma, self.omega, self.kval]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn distance(&self, other: &LocusPoint) -> f64 {
        norm3(sub3(self.to_array(), other.to_array()))
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.is_finite() && self.omega.is_finite() && self.kval.is_finite()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.sigma, -self.omega, self.kval)
    }
}

/// Unit vector in `(σ, ω, K)` space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction3([f64; 3]);

impl Direction3 {
    /// Normalizes `v`; `None` for a zero or non-finite vector.
    pub fn new(v: [f64; 3]) -> Option<Self> {
        let n = norm3(v);
        (n > 0.0 && n.is_finite()).then(|| Self([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Secant direction from `from` to `to`.
    pub fn between(from: &LocusPoint, to: &LocusPoint) -> Option<Self> {
        Self::new(sub3(to.to_array(), from.to_array()))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, v: [f64; 3]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The locus equation `1 + k G(s) e^{-hs} = 0` for one gain sign.
#[derive(Debug, Clone, Copy)]
pub struct LocusEquation<'a> {
    pub plant: &'a Plant,
    pub sign: GainSign,
}

impl<'a> LocusEquation<'a> {
    pub fn new(plant: &'a Plant, sign: GainSign) -> Self {
        Self { plant, sign }
    }

    /// Magnitude and phase residuals `(M, P)`, with `P` wrapped into `(-π, π]`.
    pub fn residuals(&self, p: &LocusPoint) -> Result<(f64, f64), ContinuationError> {
        let s = p.s();
        self.plant.check_regular(s)?;
        let plant = self.plant;
        let ln_dist = |r: Complex64| 0.5 * (s - r).norm_sqr().ln();
        let angle = |r: Complex64| (s.im - r.im).atan2(s.re - r.re);
        let m = plant.alpha().abs().ln() + pairwise_sum(plant.zeros(), ln_dist)
            - pairwise_sum(plant.poles(), ln_dist)
            - plant.delay() * p.sigma
            + p.kval;
        let phase = plant.alpha_phase() + pairwise_sum(plant.zeros(), angle)
            - pairwise_sum(plant.poles(), angle)
            - plant.delay() * p.omega;
        Ok((m, wrap_pi(phase - self.sign.phase_target())))
    }

    /// `(M_σ, M_ω)`; the phase partials follow from Cauchy-Riemann.
    pub fn magnitude_gradient(&self, s: Complex64) -> Result<(f64, f64), ContinuationError> {
        let w = self.plant.dlog_ratio(s)?;
        Ok((w.re, -w.im))
    }

    pub fn jacobian(&self, p: &LocusPoint, d: &Direction3) -> Result<[[f64; 3]; 3], ContinuationError> {
        let (ms, mw) = self.magnitude_gradient(p.s())?;
        Ok([[ms, mw, 1.0], [-mw, ms, 0.0], d.components()])
    }

    /// Newton on `(M, P, (x - x_p)·d)` starting from the prediction.
    pub fn correct(
        &self,
        predicted: &LocusPoint,
        dir: &Direction3,
        settings: &CorrectorSettings,
    ) -> Result<CorrectorOutcome, ContinuationError> {
        let anchor = predicted.to_array();
        let mut x = *predicted;
        if settings.real_axis {
            x.omega = 0.0;
        }
        let mut steps: Vec<f64> = Vec::new();
        let (mut m, mut p) = self.residuals(&x)?;
        if m.abs().max(p.abs()) <= 1e-3 * settings.tol {
            return Ok(CorrectorOutcome::new(x, 0, 0.0, m, p, true));
        }
        for iter in 1..=settings.max_iter {
            let mut jac = self.jacobian(&x, dir)?;
            let f3 = dir.dot(sub3(x.to_array(), anchor));
            let mut rhs = [-m, -p, -f3];
            if settings.real_axis {
                jac[1] = [0.0, 1.0, 0.0];
                rhs[1] = 0.0;
            }
            let delta = solve3(jac, rhs)?;
            let step = norm3(delta);
            steps.push(step);
            x = LocusPoint::new(x.sigma + delta[0], x.omega + delta[1], x.kval + delta[2]);
            if settings.real_axis {
                x.omega = 0.0;
            }
            if !x.is_finite() {
                return Err(ContinuationError::NoConvergence(iter));
            }
            (m, p) = self.residuals(&x)?;
            if step <= settings.tol && m.abs().max(p.abs()) <= settings.tol {
                let kappa = contraction(&steps);
                return Ok(CorrectorOutcome::new(x, iter, kappa, m, p, true));
            }
        }
        let kappa = contraction(&steps);
        Ok(CorrectorOutcome::new(x, settings.max_iter, kappa, m, p, false))
    }

    /// Complex Newton on `M + jP` in `s` with `K` held fixed.
    pub fn solve_frozen_gain(
        &self,
        start: Complex64,
        kval: f64,
        tol: f64,
        max_iter: usize,
        real_axis: bool,
    ) -> Result<Complex64, ContinuationError> {
        let mut s = start;
        for iter in 0..max_iter {
            let (m, p) = self.residuals(&LocusPoint::from_s(s, kval))?;
            let w = self.plant.dlog_ratio(s)?;
            if w.norm() == 0.0 {
                return Err(ContinuationError::SingularJacobian(f64::INFINITY));
            }
            let mut ds = -Complex64::new(m, p) / w;
            if real_axis {
                ds.im = 0.0;
            }
            s += ds;
            if !(s.re.is_finite() && s.im.is_finite()) {
                return Err(ContinuationError::NoConvergence(iter + 1));
            }
            if ds.norm() <= tol && m.abs().max(p.abs()) <= tol {
                return Ok(s);
            }
        }
        let (m, p) = self.residuals(&LocusPoint::from_s(s, kval))?;
        if m.abs().max(p.abs()) <= tol {
            Ok(s)
        } else {
            Err(ContinuationError::NoConvergence(max_iter))
        }
    }

    /// Start point and direction for a trajectory leaving pole `pole` at angle `theta`.
    pub fn seed_from_pole(
        &self,
        pole: Complex64,
        theta: f64,
        tol: f64,
    ) -> Result<(LocusPoint, Direction3), ContinuationError> {
        let real_axis = pole.im == 0.0 && theta.sin().abs() < 1e-12;
        // stay well inside the neighbourhood where the pole dominates
        let nearest = self
            .plant
            .poles()
            .iter()
            .chain(self.plant.zeros())
            .map(|r| (r - pole).norm())
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let mut offset = (1e-3 * (1.0 + pole.norm())).min(0.25 * nearest);
        let mut s;
        let mut kval;
        let mut halvings = 0;
        loop {
            s = pole + Complex64::from_polar(offset, theta);
            if real_axis {
                s.im = 0.0;
            }
            let (m0, p0) = self.residuals(&LocusPoint::from_s(s, 0.0))?;
            kval = -m0;
            if p0.abs() <= 0.1 || halvings == 30 {
                break;
            }
            offset *= 0.5;
            halvings += 1;
        }
        // the polish may fail for badly scaled plants; the seed is still usable
        if let Ok(polished) = self.solve_frozen_gain(s, kval, tol, 8, real_axis) {
            if (polished - s).norm() < 0.5 * offset {
                s = polished;
            }
        }
        let dir = Direction3::new([theta.cos(), if real_axis { 0.0 } else { theta.sin() }, 1.0])
            .expect("unit vector");
        Ok((LocusPoint::from_s(s, kval), dir))
    }
}

fn contraction(steps: &[f64]) -> f64 {
    match steps {
        [first, second, ..] if *first > 0.0 => second / first,
        _ => 0.0,
    }
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3], ContinuationError> {
    let mut pivots = [0.0f64; 3];
    for col in 0..3 {
        let row = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        a.swap(col, row);
        b.swap(col, row);
        pivots[col] = a[col][col].abs();
        if pivots[col] == 0.0 {
            return Err(ContinuationError::SingularJacobian(f64::INFINITY));
        }
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let largest = pivots.iter().cloned().fold(0.0, f64::max);
    let smallest = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if largest / smallest > 1e12 {
        return Err(ContinuationError::SingularJacobian(largest / smallest));
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let tail: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Pin `ω = 0` while iterating.
    pub real_axis: bool,
}

impl Default for CorrectorSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 20,
            real_axis: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorOutcome {
    pub point: LocusPoint,
    pub iterations: usize,
    /// Ratio of the second to the first Newton step length.
    pub kappa: f64,
    /// `|1 - e^{M + jP}|` at the final point.
    pub delta: f64,
    pub converged: bool,
    pub m: f64,
    pub p: f64,
}

impl CorrectorOutcome {
    fn new(point: LocusPoint, iterations: usize, kappa: f64, m: f64, p: f64, converged: bool) -> Self {
        let delta = (Complex64::new(1.0, 0.0) - Complex64::new(m, p).exp()).norm();
        Self {
            point,
            iterations,
            kappa,
            delta,
            converged,
            m,
            p,
        }
    }

    pub fn require_converged(self) -> Result<Self, ContinuationError> {
        if self.converged {
            Ok(self)
        } else {
            Err(ContinuationError::NoConvergence(self.iterations))
        }
    }
}

/// Adaptive step length driven by the corrector's contraction and distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepController {
    pub h: f64,
    pub kappa_nom: f64,
    pub delta_nom: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for StepController {
    fn default() -> Self {
        Self {
            h: 1e-2,
            kappa_nom: 1.1,
            delta_nom: 1e-3,
            h_min: 1e-8,
            h_max: 0.5,
        }
    }
}

impl StepController {
    /// Next step length and whether the last prediction must be redone.
    pub fn step_update(&self, out: &CorrectorOutcome) -> Result<(f64, bool), ContinuationError> {
        let factor = if out.converged {
            let kd = (out.kappa / self.kappa_nom).sqrt();
            let dd = (out.delta / self.delta_nom).sqrt();
            let f = kd.max(dd);
            if f.is_nan() {
                2.0
            } else {
                f.clamp(0.5, 2.0)
            }
        } else {
            2.0
        };
        let repeat = factor == 2.0 || !out.converged;
        if repeat && self.h <= self.h_min {
            return Err(ContinuationError::StepUnderflow(self.h_min));
        }
        Ok(((self.h / factor).clamp(self.h_min, self.h_max), repeat))
    }

    /// Halves the step after a rejected prediction.
    pub fn shrink(&mut self) -> Result<(), ContinuationError> {
        if self.h <= self.h_min {
            return Err(ContinuationError::StepUnderflow(self.h_min));
        }
        self.h = (0.5 * self.h).max(self.h_min);
        Ok(())
    }
}

pub fn predict(prev: &LocusPoint, d: &Direction3, h: f64) -> LocusPoint {
    let c = d.components();
    LocusPoint::new(prev.sigma + h * c[0], prev.omega + h * c[1], prev.kval + h * c[2])
}

/// Angles at which the `μ` roots leave pole `poles[index]` (multiplicity `μ`).
pub fn departure_angles(plant: &Plant, index: usize, sign: GainSign) -> Result<Vec<f64>, ContinuationError> {
    let pole = *plant.poles().get(index).ok_or(ContinuationError::PoleIndex(index))?;
    let angle = |r: &Complex64| (pole.im - r.im).atan2(pole.re - r.re);
    let (same, rest): (Vec<Complex64>, Vec<Complex64>) = plant.poles().iter().partition(|p| **p == pole);
    let mu = same.len();
    let rest_phase = plant.alpha_phase() + plant.zeros().iter().map(angle).sum::<f64>()
        - rest.iter().map(angle).sum::<f64>();
    let base = rest_phase - plant.delay() * pole.im - sign.phase_target();
    Ok((0..mu)
        .map(|j| wrap_pi((wrap_pi(base) + 2.0 * PI * j as f64) / mu as f64))
        .collect())
}

/// Departure angle of a simple pole for positive gains.
pub fn departure_direction_pole(plant: &Plant, index: usize) -> Result<f64, ContinuationError> {
    let angles = departure_angles(plant, index, GainSign::Positive)?;
    match angles.as_slice() {
        [theta] => Ok(*theta),
        _ => Err(ContinuationError::RepeatedPole(plant.poles()[index])),
    }
}

/// `ds/d|k|` at a boundary crossing.
pub fn entry_direction_crossing(bf: &BoundaryFunctions, c: &BoundaryCrossing) -> Result<Complex64, ContinuationError> {
    let slope = bf.phiprime_of(c.omega);
    if slope.abs() <= crate::boundary::TOL_DIRECTION {
        return Err(ContinuationError::DegenerateCrossing { omega: c.omega, slope });
    }
    Ok(-(Complex64::new(slope, bf.kprime_of(c.omega)) * c.k).inv())
}

/// Tangent of the locus in `(σ, ω, K)` at a crossing, oriented towards increasing gain.
pub fn entry_tangent(d0: Complex64, k: f64) -> Direction3 {
    let ds_dk = d0 * k;
    Direction3::new([ds_dk.re, ds_dk.im, 1.0]).expect("finite tangent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::RegionSpec;
    use crate::plant::fixtures::{p1, p2};
    use proptest::prelude::*;

    fn pos(plant: &Plant) -> LocusEquation<'_> {
        LocusEquation::new(plant, GainSign::Positive)
    }

    #[test]
    fn residual_examples() {
        let plant = p1();
        let eq = pos(&plant);
        let (m, p) = eq.residuals(&LocusPoint::new(-1.0, 0.0, -1.0)).unwrap();
        assert!(m.abs() < 1e-15 && p.abs() < 1e-15);
        let k = (0.5 * (-0.5f64).exp()).ln();
        let (m, p) = eq.residuals(&LocusPoint::new(-0.5, 0.0, k)).unwrap();
        assert!(m.abs() < 1e-15 && p.abs() < 1e-15);
        let (m, p) = eq.residuals(&LocusPoint::new(-1.0, 0.0, 0.0)).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && p.abs() < 1e-15);
        assert!(eq.residuals(&LocusPoint::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn jacobian_at_branch_point() {
        let plant = p1();
        let d = Direction3::new([1.0, 0.0, 0.0]).unwrap();
        let j = pos(&plant).jacobian(&LocusPoint::new(-1.0, 0.0, -1.0), &d).unwrap();
        assert!(j[0][0].abs() < 1e-15 && j[1][1].abs() < 1e-15);
        assert_eq!(j[0][2], 1.0);
        assert_eq!(j[2], [1.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn jacobian_matches_finite_differences(
            sigma in -3.0f64..2.0,
            omega in -4.0f64..4.0,
            kval in -3.0f64..3.0,
        ) {
            let plant = p2();
            let eq = pos(&plant);
            let x = LocusPoint::new(sigma, omega, kval);
            prop_assume!(plant.poles().iter().chain(plant.zeros()).all(|r| (x.s() - r).norm() > 0.1));
            let d = Direction3::new([0.3, -0.2, 0.9]).unwrap();
            let j = eq.jacobian(&x, &d).unwrap();
            prop_assert_eq!(j[1][0], -j[0][1]);
            prop_assert_eq!(j[1][1], j[0][0]);
            let step = 1e-6;
            let eval = |dx: f64, dy: f64| eq.residuals(&LocusPoint::new(sigma + dx, omega + dy, kval)).unwrap();
            let (mp, pp) = eval(step, 0.0);
            let (mm, pm) = eval(-step, 0.0);
            let fd = [(mp - mm) / (2.0 * step), wrap_pi(pp - pm) / (2.0 * step)];
            let (mp, pp) = eval(0.0, step);
            let (mm, pm) = eval(0.0, -step);
            let fdw = [(mp - mm) / (2.0 * step), wrap_pi(pp - pm) / (2.0 * step)];
            for (num, exact) in [(fd[0], j[0][0]), (fd[1], j[1][0]), (fdw[0], j[0][1]), (fdw[1], j[1][1])] {
                prop_assert!((num - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} vs {}", num, exact);
            }
        }
    }

    #[test]
    fn predict_examples() {
        let d = Direction3::new([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(predict(&LocusPoint::new(0.0, 0.0, 0.0), &d, 0.1), LocusPoint::new(0.1, 0.0, 0.0));
        let up = Direction3::new([0.0, 1.0, 0.0]).unwrap();
        assert_eq!(predict(&LocusPoint::new(-1.0, 0.0, -1.0), &up, 0.2), LocusPoint::new(-1.0, 0.2, -1.0));
        assert_eq!(predict(&LocusPoint::new(-1.0, 0.0, -1.0), &up, 0.0), LocusPoint::new(-1.0, 0.0, -1.0));
    }

    #[test]
    fn corrector_lands_on_real_locus() {
        let plant = p1();
        let eq = pos(&plant);
        let real = |s: f64| LocusPoint::new(s, 0.0, (-s * s.exp()).ln());
        let dir = Direction3::between(&real(-0.40), &real(-0.44)).unwrap();
        let predicted = LocusPoint::new(-0.48, 0.0, 0.30f64.ln());
        for real_axis in [false, true] {
            let settings = CorrectorSettings { real_axis, ..Default::default() };
            let out = eq.correct(&predicted, &dir, &settings).unwrap();
            assert!(out.converged);
            let x = out.point;
            assert!(x.omega.abs() < 1e-12);
            assert!((x.kval - (-x.sigma * x.sigma.exp()).ln()).abs() < 1e-6);
            assert!(out.m.abs() <= 1e-6 && out.p.abs() <= 1e-6);
            assert!(dir.dot(sub3(x.to_array(), predicted.to_array())).abs() <= 1e-6);
            assert!(out.delta <= 2.0 * (out.m.abs() + out.p.abs()) + 1e-15);
        }
    }

    #[test]
    fn corrector_fixed_point() {
        let plant = p1();
        let dir = Direction3::new([1.0, 0.0, 0.0]).unwrap();
        let out = pos(&plant)
            .correct(&LocusPoint::new(-1.0, 0.0, -1.0), &dir, &CorrectorSettings::default())
            .unwrap();
        assert!(out.converged && out.iterations <= 1 && out.delta <= 1e-12);
    }

    #[test]
    fn corrector_is_bounded_off_manifold() {
        let plant = p1();
        let dir = Direction3::new([-1.0, 0.0, 1.0]).unwrap();
        if let Ok(out) = pos(&plant).correct(&LocusPoint::new(-0.5, 0.0, 5.0), &dir, &CorrectorSettings::default()) {
            assert!(out.converged || out.iterations == 20);
        }
    }

    #[test]
    fn step_update_examples() {
        let ctl = StepController { h: 0.1, ..Default::default() };
        let at = |kappa: f64, delta: f64| CorrectorOutcome {
            point: LocusPoint::new(0.0, 0.0, 0.0),
            iterations: 2,
            kappa,
            delta,
            converged: true,
            m: 0.0,
            p: 0.0,
        };
        assert_eq!(ctl.step_update(&at(1.1, 1e-3)).unwrap(), (0.1, false));
        let (h, rep) = ctl.step_update(&at(4.4, 1e-4)).unwrap();
        assert!((h - 0.05).abs() < 1e-15 && rep);
        let (h, rep) = ctl.step_update(&at(1.1 / 4.0, 0.25e-3)).unwrap();
        assert!((h - 0.2).abs() < 1e-15 && !rep);
        let near_cap = StepController { h: 0.4, ..ctl };
        assert_eq!(near_cap.step_update(&at(0.0, 0.0)).unwrap(), (0.5, false));
        let failed = CorrectorOutcome { converged: false, ..at(0.0, 0.0) };
        assert_eq!(ctl.step_update(&failed).unwrap(), (0.05, true));
        let floor = StepController { h: 1e-8, ..ctl };
        assert!(matches!(floor.step_update(&failed), Err(ContinuationError::StepUnderflow(_))));
    }

    #[test]
    fn departure_examples() {
        assert!((departure_direction_pole(&p1(), 0).unwrap() - PI).abs() < 1e-15);
        let plant = p2();
        let near = |x: f64| plant.poles().iter().position(|p| (p.re - x).abs() < 1e-9).unwrap();
        assert!((departure_direction_pole(&plant, near(-0.5)).unwrap() - PI).abs() < 1e-12);
        assert!((departure_direction_pole(&plant, near(-2.5)).unwrap() - PI).abs() < 1e-12);
        let idx = near(-1.0);
        assert!(departure_direction_pole(&plant, idx).unwrap().abs() < 1e-12);

        let complex = Plant::new(
            1.0,
            0.7,
            vec![Complex64::new(-3.0, 0.0)],
            vec![Complex64::new(-1.0, 2.0), Complex64::new(-1.0, -2.0), Complex64::new(-0.2, 0.0)],
        )
        .unwrap();
        let up = complex.poles().iter().position(|p| p.im > 0.0).unwrap();
        let down = complex.poles().iter().position(|p| p.im < 0.0).unwrap();
        let a = departure_direction_pole(&complex, up).unwrap();
        let b = departure_direction_pole(&complex, down).unwrap();
        assert!(wrap_pi(a + b).abs() < 1e-12);
    }

    #[test]
    fn repeated_pole_splits() {
        let plant = Plant::new(1.0, 1.0, vec![], vec![Complex64::new(-1.0, 0.0); 2]).unwrap();
        assert!(matches!(departure_direction_pole(&plant, 0), Err(ContinuationError::RepeatedPole(_))));
        let mut angles = departure_angles(&plant, 0, GainSign::Positive).unwrap();
        angles.sort_by(f64::total_cmp);
        // (1/(s+1)^2) e^{-s} at s = -1: residue phase 0, so theta = (-pi + 2 pi j)/2
        assert!((angles[0] + PI / 2.0).abs() < 1e-12 && (angles[1] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_point_is_on_locus() {
        let plant = p2();
        let eq = pos(&plant);
        for (i, pole) in plant.poles().iter().enumerate() {
            let theta = departure_direction_pole(&plant, i).unwrap();
            let (x, d) = eq.seed_from_pole(*pole, theta, 1e-10).unwrap();
            let (m, p) = eq.residuals(&x).unwrap();
            assert!(m.abs() < 1e-8 && p.abs() < 1e-8, "{m} {p}");
            assert!((x.s() - pole).norm() < 2e-3 * (1.0 + pole.norm()));
            assert!((norm3(d.components()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entry_direction_single_pole() {
        let plant = p1();
        let region = RegionSpec::new(-2.0, 1.0).unwrap();
        let bf = BoundaryFunctions::new(&plant, &region).unwrap();
        let c = bf.boundary_crossings(&region, GainSign::Positive).unwrap().inward[0];
        let d0 = entry_direction_crossing(&bf, &c).unwrap();
        assert!((d0.re - 2f64.exp()).abs() < 1e-9 && d0.im.abs() < 1e-12);
    }

    #[test]
    fn entry_direction_matches_perturbation() {
        let plant = p2();
        let region = RegionSpec::new(-3.5, 5.0).unwrap();
        let bf = BoundaryFunctions::new(&plant, &region).unwrap();
        let eq = pos(&plant);
        let set = bf.boundary_crossings(&region, GainSign::Positive).unwrap();
        assert!(!set.is_empty());
        for c in set.iter() {
            let d0 = entry_direction_crossing(&bf, c).unwrap();
            match c.direction {
                crate::boundary::CrossingDirection::Inward => assert!(d0.re > 0.0),
                crate::boundary::CrossingDirection::Outward => assert!(d0.re < 0.0),
            }
            let root_at = |k: f64| {
                eq.solve_frozen_gain(c.location(-3.5), k.ln(), 1e-13, 30, c.omega == 0.0).unwrap()
            };
            let eps = 1e-5;
            let fd = (root_at(c.k * (1.0 + eps)) - root_at(c.k * (1.0 - eps))) / (2.0 * eps * c.k);
            assert!((fd - d0).norm() <= 1e-4 * d0.norm(), "{fd} vs {d0}");
        }
    }
}
