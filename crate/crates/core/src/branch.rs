//! Multiple roots of the locus equation and how trajectories leave them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::wrap_pi;
use crate::boundary::RegionSpec;
use crate::plant::{GainSign, Plant, PlantError};
use crate::poly::{PolyError, RealPolynomial};

pub const TOL_PHASE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("branch multiplicity must be at least 2, got {0}")]
    Multiplicity(usize),
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub s: Complex64,
    pub k: f64,
    pub kval: f64,
    /// Number of trajectories meeting at the point.
    pub multiplicity: usize,
    /// `false` when the gain exceeds the cap; such points are reported but not traced.
    pub active: bool,
    pub sign: GainSign,
}

impl BranchPoint {
    /// Leading coefficient `a` of `ln(G(s)e^{-hs}) - ln(G(s_b)e^{-hs_b}) ≈ a (s - s_b)^N`.
    pub fn local_coefficient(&self, plant: &Plant) -> Complex64 {
        let n = self.multiplicity as i32;
        let power = |r: &Complex64| (self.s - r).powi(-n);
        let sum: Complex64 =
            plant.zeros().iter().map(power).sum::<Complex64>() - plant.poles().iter().map(power).sum::<Complex64>();
        let mut a = sum * if n % 2 == 0 { -1.0 } else { 1.0 } / n as f64;
        if self.s.im == 0.0 {
            a.im = 0.0;
        }
        a
    }

    /// Replaces a measured direction of arrival by the nearest exact one.
    ///
    /// Along the locus `a (s - s_b)^N` is real and equals `-(K - K_b)`, so
    /// arrivals come in along rays where it is positive.
    pub fn snap_incoming(&self, plant: &Plant, incoming: f64) -> f64 {
        let a = self.local_coefficient(plant);
        let n = self.multiplicity as f64;
        let base = -a.arg() / n;
        let step = 2.0 * PI / n;
        // arrival rays point away from s_b; the motion along them is reversed
        let ray = wrap_pi(incoming + PI);
        let j = ((ray - base) / step).round();
        let snapped = wrap_pi(base + j * step + PI);
        if self.s.im == 0.0 {
            snap_axis(snapped)
        } else {
            snapped
        }
    }

    /// Outgoing angles for a trajectory arriving along `incoming`.
    pub fn outgoing_angles(&self, incoming: f64) -> Result<Vec<f64>, BranchError> {
        let base = redirect(incoming, self.multiplicity)?;
        let n = self.multiplicity as f64;
        Ok((0..self.multiplicity)
            .map(|j| snap_axis(wrap_pi(base + 2.0 * PI * j as f64 / n)))
            .collect())
    }
}

/// Rounds angles within `1e-12` of a multiple of `π/2` onto it.
fn snap_axis(angle: f64) -> f64 {
    let quarter = (angle / (0.5 * PI)).round();
    if (angle - quarter * 0.5 * PI).abs() <= 1e-12 {
        wrap_pi(quarter * 0.5 * PI)
    } else {
        angle
    }
}

/// Direction change of a root passing through a branch point of multiplicity `n`.
pub fn redirect(incoming: f64, n: usize) -> Result<f64, BranchError> {
    if n < 2 {
        return Err(BranchError::Multiplicity(n));
    }
    let turn = if n.is_multiple_of(2) { -PI / n as f64 } else { 0.0 };
    Ok(wrap_pi(incoming + turn))
}

/// Branch points of the given gain sign inside `Re(s) ≥ σ₀`, sorted by `kval`.
pub fn branch_points(
    plant: &Plant,
    region: &RegionSpec,
    sign: GainSign,
) -> Result<Vec<BranchPoint>, BranchError> {
    let numerator = plant.branch_numerator();
    if numerator.degree() == 0 {
        return Ok(Vec::new());
    }
    let derivative = numerator.derivative();
    let lnk = region.lnkmax();
    let mut out = Vec::new();
    // lower half-plane roots are taken as exact mirrors of the upper ones
    for root in numerator.complex_roots()?.roots.iter().filter(|r| r.value.im >= 0.0) {
        let s = polish(&numerator, &derivative, root.value, root.multiplicity);
        if s.re < region.sigma0 {
            continue;
        }
        // roots that coincide with poles or zeros are cancelled factors
        if plant.check_regular(s).is_err() {
            continue;
        }
        let value = plant.log_eval(s)?;
        if wrap_pi(value.phase - sign.phase_target()).abs() > TOL_PHASE {
            continue;
        }
        let kval = -value.lnmag;
        let k = kval.exp();
        if !(k > 0.0 && k.is_finite()) {
            continue;
        }
        let point = BranchPoint {
            s,
            k,
            kval,
            multiplicity: root.multiplicity + 1,
            active: kval <= lnk,
            sign,
        };
        out.push(point);
        if s.im > 0.0 {
            out.push(BranchPoint { s: s.conj(), ..point });
        }
    }
    out.sort_by(|a, b| a.kval.total_cmp(&b.kval).then(b.s.im.total_cmp(&a.s.im)));
    Ok(out)
}

/// Modified Newton (step scaled by multiplicity); keeps the best iterate.
fn polish(p: &RealPolynomial, dp: &RealPolynomial, start: Complex64, multiplicity: usize) -> Complex64 {
    let real = start.im == 0.0;
    let mut best = start;
    let mut best_res = p.eval_complex(start).norm();
    let mut z = start;
    for _ in 0..8 {
        let d = dp.eval_complex(z);
        if d.norm() == 0.0 {
            break;
        }
        z -= p.eval_complex(z) / d * multiplicity as f64;
        if real {
            z.im = 0.0;
        }
        let res = p.eval_complex(z).norm();
        if res < best_res {
            best = z;
            best_res = res;
        } else {
            break;
        }
    }
    best
}
