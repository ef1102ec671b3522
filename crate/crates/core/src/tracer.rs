//! Assembles the full root locus: seeds, traced trajectories, branch events.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{BoundaryCrossing, BoundaryError, BoundaryFunctions, CrossingSet, RegionSpec};
use crate::branch::{branch_points, BranchError, BranchPoint};
use crate::continuation::{
    departure_angles, entry_direction_crossing, entry_tangent, predict, ContinuationError,
    CorrectorSettings, Direction3, LocusEquation, LocusPoint, StepController,
};
use crate::plant::{GainSign, Plant};

/// Match tolerances between a traced exit and a computed outward crossing.
pub const TOL_MATCH_OMEGA: f64 = 1e-4;
pub const TOL_MATCH_K: f64 = 1e-3;
/// Allowed undershoot of `σ₀` for recorded points.
pub const TOL_EXIT: f64 = 1e-6;

/// Largest accepted corrector displacement, relative to the step length.
const JUMP_RATIO: f64 = 0.5;

/// Largest branch distance from a step chord, relative to its length.
const CAPTURE_RATIO: f64 = 0.75;

/// How far past either end of a chord a branch may project.
const CAPTURE_OVERHANG: f64 = 0.05;

/// Largest s-plane step, relative to the distance to the nearest pole or zero.
const SINGULAR_REACH: f64 = 0.25;

/// Steps longer than this multiple of the minimum are shortened to resolve
/// ambiguous branch captures and skipped exits.
const REFINE_FLOOR: f64 = 1e3;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error("branch point {0} lies on the boundary; the locus there is ill-posed")]
    BranchOnBoundary(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    /// Index into the plant's pole list and the departure angle.
    OpenLoopPole { index: usize, angle: f64 },
    /// Index into `crossings.inward`.
    BoundaryEntry { crossing: usize },
    /// Index into `branch_points` and the outgoing angle.
    BranchContinuation { branch: usize, angle: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    GainCap,
    /// `matched` indexes `crossings.outward`.
    LeftRegion { matched: Option<usize> },
    ReachedBranch { branch: usize },
    StepFailure { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub origin: Origin,
    /// Points in order of increasing `K`. A pole start carries `K = -∞` (`k = 0`).
    pub points: Vec<LocusPoint>,
    pub termination: Termination,
    pub sign: GainSign,
    /// Conjugate copy of another trajectory rather than traced.
    pub mirrored: bool,
}

impl Trajectory {
    /// Signed gain at each point (`0` at a pole start).
    pub fn gains(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| self.sign.gain(p.kval) + 0.0)
    }

    pub fn last(&self) -> Option<&LocusPoint> {
        self.points.last()
    }

    pub fn is_real(&self) -> bool {
        self.points.iter().all(|p| p.omega == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub corrector: CorrectorSettings,
    pub controller: StepController,
    pub negative_gains: bool,
    pub mirror: bool,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            corrector: CorrectorSettings::default(),
            controller: StepController::default(),
            negative_gains: false,
            mirror: true,
            max_steps: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootLocusResult {
    pub plant: Plant,
    pub region: RegionSpec,
    pub crossings: CrossingSet,
    pub branch_points: Vec<BranchPoint>,
    pub trajectories: Vec<Trajectory>,
    pub warnings: Vec<String>,
}

/// Starting state of one trajectory.
#[derive(Debug, Clone)]
pub struct Seed {
    pub origin: Origin,
    pub points: Vec<LocusPoint>,
    pub direction: Direction3,
    pub real_axis: bool,
    /// Branch the seed leaves from; never captured by it.
    pub exclude_branch: Option<usize>,
}

struct Context<'a> {
    eq: LocusEquation<'a>,
    region: RegionSpec,
    options: TraceOptions,
    /// Active branch points of this sign, with their global index.
    branches: Vec<(usize, BranchPoint)>,
    /// Outward crossings of this sign, with their global index.
    exits: Vec<(usize, BoundaryCrossing)>,
}

/// Pole and boundary seeds for positive gains.
pub fn seed_points(plant: &Plant, region: &RegionSpec, options: &TraceOptions) -> Result<Vec<Seed>, TraceError> {
    let bf = BoundaryFunctions::new(plant, region)?;
    let crossings = bf.boundary_crossings(region, GainSign::Positive)?;
    let eq = LocusEquation::new(plant, GainSign::Positive);
    seeds(&eq, &bf, region, &crossings, options)
}

fn seeds(
    eq: &LocusEquation,
    bf: &BoundaryFunctions,
    region: &RegionSpec,
    crossings: &CrossingSet,
    options: &TraceOptions,
) -> Result<Vec<Seed>, TraceError> {
    let plant = eq.plant;
    let tol = 1e-3 * options.corrector.tol;
    let mut out = Vec::new();
    let mut seen: Vec<Complex64> = Vec::new();
    for (index, pole) in plant.poles().iter().enumerate() {
        if pole.re < region.sigma0 || (options.mirror && pole.im < 0.0) || seen.contains(pole) {
            continue;
        }
        seen.push(*pole);
        for angle in departure_angles(plant, index, eq.sign)? {
            let (start, direction) = eq.seed_from_pole(*pole, angle, tol)?;
            out.push(Seed {
                origin: Origin::OpenLoopPole { index, angle },
                points: vec![LocusPoint::from_s(*pole, f64::NEG_INFINITY), start],
                direction,
                real_axis: pole.im == 0.0 && start.omega == 0.0,
                exclude_branch: None,
            });
        }
    }
    for (crossing, c) in crossings.inward.iter().enumerate() {
        if c.sign != eq.sign {
            continue;
        }
        let d0 = entry_direction_crossing(bf, c)?;
        let start = LocusPoint::new(region.sigma0, c.omega, c.kval);
        out.push(Seed {
            origin: Origin::BoundaryEntry { crossing },
            points: vec![start],
            direction: entry_tangent(d0, c.k),
            real_axis: c.omega == 0.0,
            exclude_branch: None,
        });
        if !options.mirror && c.omega > 0.0 {
            let d = entry_tangent(d0.conj(), c.k);
            out.push(Seed {
                origin: Origin::BoundaryEntry { crossing },
                points: vec![start.conj()],
                direction: d,
                real_axis: false,
                exclude_branch: None,
            });
        }
    }
    Ok(out)
}

/// Computes the root locus inside `Re(s) ≥ σ₀` up to the gain cap.
pub fn run(plant: &Plant, region: &RegionSpec, options: &TraceOptions) -> Result<RootLocusResult, TraceError> {
    let bf = BoundaryFunctions::new(plant, region)?;
    let signs: &[GainSign] = if options.negative_gains {
        &[GainSign::Positive, GainSign::Negative]
    } else {
        &[GainSign::Positive]
    };

    let mut crossings = CrossingSet::default();
    let mut branches = Vec::new();
    for &sign in signs {
        crossings.extend(bf.boundary_crossings(region, sign)?);
        branches.extend(branch_points(plant, region, sign)?);
    }
    if let Some(b) = branches
        .iter()
        .find(|b| b.active && (b.s.re - region.sigma0).abs() <= crate::boundary::TOL_BOUNDARY)
    {
        return Err(TraceError::BranchOnBoundary(b.s));
    }

    let mut trajectories = Vec::new();
    let mut warnings = Vec::new();
    for &sign in signs {
        let ctx = Context {
            eq: LocusEquation::new(plant, sign),
            region: *region,
            options: *options,
            branches: branches
                .iter()
                .enumerate()
                .filter(|(_, b)| b.sign == sign && b.active)
                .filter(|(_, b)| !options.mirror || b.s.im >= 0.0)
                .map(|(i, b)| (i, *b))
                .collect(),
            exits: crossings
                .outward
                .iter()
                .enumerate()
                .filter(|(_, c)| c.sign == sign)
                .map(|(i, c)| (i, *c))
                .collect(),
        };
        let mut wave = seeds(&ctx.eq, &bf, region, &crossings, options)?;
        let mut spawned: Vec<usize> = Vec::new();
        while !wave.is_empty() {
            let traced: Vec<Trajectory> = wave.par_iter().map(|seed| trace(&ctx, seed)).collect();
            let mut next: Vec<(f64, f64, Seed)> = Vec::new();
            for t in &traced {
                if let Termination::ReachedBranch { branch } = t.termination {
                    if spawned.contains(&branch) {
                        continue;
                    }
                    spawned.push(branch);
                    next.extend(ctx.spawn(branch, &branches[branch], t)?);
                }
            }
            next.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            for t in traced {
                let mirror = (options.mirror && !t.is_real()).then(|| mirror_of(&t, plant, &branches));
                trajectories.push(t);
                trajectories.extend(mirror);
            }
            wave = next.into_iter().map(|(_, _, s)| s).collect();
        }
    }

    dedup_endpoints(&mut trajectories);
    for t in &trajectories {
        match &t.termination {
            Termination::LeftRegion { matched: None } => warnings.push(format!(
                "trajectory leaving at omega = {:.6} matched no outward crossing",
                t.last().map_or(f64::NAN, |p| p.omega)
            )),
            Termination::StepFailure { reason } if !t.mirrored => {
                warnings.push(format!("trajectory from {:?} stopped: {reason}", t.origin))
            }
            _ => {}
        }
    }

    Ok(RootLocusResult {
        plant: plant.clone(),
        region: *region,
        crossings,
        branch_points: branches,
        trajectories,
        warnings,
    })
}

impl Context<'_> {
    fn settings(&self, real_axis: bool) -> CorrectorSettings {
        CorrectorSettings {
            real_axis,
            ..self.options.corrector
        }
    }

    /// Distance from `s` to the nearest open-loop pole or zero; the locus
    /// bends on that scale.
    fn singularity_distance(&self, s: Complex64) -> f64 {
        let plant = self.eq.plant;
        plant
            .poles()
            .iter()
            .chain(plant.zeros())
            .map(|r| (r - s).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn straddles_real_root(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = (a.min(b), a.max(b));
        let plant = self.eq.plant;
        plant
            .poles()
            .iter()
            .chain(plant.zeros())
            .any(|r| r.im == 0.0 && r.re > lo && r.re < hi)
    }

    fn lnkmax(&self) -> f64 {
        self.region.lnkmax()
    }

    /// Continuations leaving a branch point reached by `arrival`.
    fn spawn(&self, index: usize, b: &BranchPoint, arrival: &Trajectory) -> Result<Vec<(f64, f64, Seed)>, TraceError> {
        let n = arrival.points.len();
        let before = arrival.points[n.saturating_sub(2)].s();
        let incoming = b.snap_incoming(self.eq.plant, (b.s - before).arg());
        let mut out = Vec::new();
        for mut angle in b.outgoing_angles(incoming)? {
            let mut real_axis = false;
            if b.s.im == 0.0 && angle.sin().abs() <= 1e-9 {
                angle = if angle.cos() > 0.0 { 0.0 } else { PI };
                real_axis = true;
            }
            if self.options.mirror && b.s.im == 0.0 && angle.sin() < 0.0 {
                continue;
            }
            let sin = if real_axis { 0.0 } else { angle.sin() };
            let direction = Direction3::new([angle.cos(), sin, 0.0]).expect("unit vector");
            out.push((
                b.kval,
                angle,
                Seed {
                    origin: Origin::BranchContinuation { branch: index, angle },
                    points: vec![LocusPoint::from_s(b.s, b.kval)],
                    direction,
                    real_axis,
                    exclude_branch: Some(index),
                },
            ));
        }
        Ok(out)
    }

    /// Branches lying across the chord of a step in the s-plane: the
    /// projection must fall inside the chord and the distance stay within a
    /// fraction of the chord length. Overshooting a branch of multiplicity N
    /// moves the corrector onto a departing ray at an angle of `π - π/N` to
    /// the arriving one, which puts the branch at most half a chord length
    /// away. Gains are not interpolated along the chord (s moves like a root
    /// of the gain near a branch); the only gain check is that the branch is
    /// not behind the last accepted point.
    fn capture_candidates(&self, from: &LocusPoint, to: &LocusPoint, exclude: Option<usize>) -> Vec<Candidate> {
        let ds = (to.s() - from.s()).norm();
        self.branches
            .iter()
            .filter(|(i, _)| Some(*i) != exclude)
            .filter_map(|(i, b)| {
                let (dist, t) = segment_distance(b.s, from, to);
                let slack = 1e-9 * (1.0 + b.s.norm());
                let inside = (-CAPTURE_OVERHANG..=1.0 + CAPTURE_OVERHANG).contains(&t) || dist <= slack;
                let gate = 1e-2 * (1.0 + b.kval.abs());
                (inside && dist <= CAPTURE_RATIO * ds + slack && b.kval >= from.kval - gate).then_some(Candidate {
                    dist,
                    t,
                    index: *i,
                    branch: *b,
                })
            })
            .collect()
    }

    /// True when the step passes an outward crossing without either end
    /// leaving the region, i.e. the trajectory went out and back in between
    /// two accepted points.
    fn skips_exit(&self, last: &LocusPoint, new: &LocusPoint) -> bool {
        let ds = (new.s() - last.s()).norm();
        if last.sigma.min(new.sigma) - self.region.sigma0 > ds {
            return false;
        }
        let (lo, hi) = (last.omega.abs().min(new.omega.abs()), last.omega.abs().max(new.omega.abs()));
        // exits are sorted by gain
        let first = self.exits.partition_point(|(_, c)| c.kval <= last.kval);
        self.exits[first..]
            .iter()
            .take_while(|(_, c)| c.kval <= new.kval)
            .any(|(_, c)| c.omega >= lo - ds && c.omega <= hi + ds)
    }

    fn refine_gain_cap(&self, last: &LocusPoint, new: &LocusPoint, real_axis: bool) -> Option<LocusPoint> {
        let lnk = self.lnkmax();
        let t = (lnk - last.kval) / (new.kval - last.kval);
        if real_axis {
            let m = |sigma: f64| {
                self.eq
                    .residuals(&LocusPoint::new(sigma, 0.0, lnk))
                    .map(|r| r.0)
                    .unwrap_or(f64::NAN)
            };
            let (mut a, mut b) = (last.sigma, new.sigma);
            let (fa, fb) = (m(a), m(b));
            if !(fa * fb <= 0.0) {
                return None;
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid == a || mid == b {
                    break;
                }
                if m(mid) * fa > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let sigma = if m(a).abs() < m(b).abs() { a } else { b };
            return Some(LocusPoint::new(sigma, 0.0, lnk));
        }
        let guess = last.s() + (new.s() - last.s()) * t;
        let s = self
            .eq
            .solve_frozen_gain(guess, lnk, 1e-3 * self.options.corrector.tol, 30, false)
            .ok()?;
        let span = (new.s() - last.s()).norm();
        ((s - guess).norm() <= span + 1e-9).then(|| LocusPoint::from_s(s, lnk))
    }

    /// Exit point with `σ = σ₀`, solving for `(ω, K)`.
    fn refine_exit(&self, last: &LocusPoint, new: &LocusPoint, real_axis: bool) -> Option<LocusPoint> {
        let s0 = self.region.sigma0;
        let t = (last.sigma - s0) / (last.sigma - new.sigma);
        let mut x = LocusPoint::new(
            s0,
            if real_axis { 0.0 } else { last.omega + t * (new.omega - last.omega) },
            last.kval + t * (new.kval - last.kval),
        );
        let tol = 1e-3 * self.options.corrector.tol;
        for _ in 0..30 {
            let (m, p) = self.eq.residuals(&x).ok()?;
            let (ms, mw) = self.eq.magnitude_gradient(x.s()).ok()?;
            let dw = if real_axis || ms == 0.0 { 0.0 } else { -p / ms };
            let dk = -m - mw * dw;
            x.omega += dw;
            x.kval += dk;
            if dw.abs().max(dk.abs()) <= tol && m.abs().max(p.abs()) <= self.options.corrector.tol {
                break;
            }
        }
        let (m, p) = self.eq.residuals(&x).ok()?;
        let span = last.distance(new);
        (m.abs().max(p.abs()) <= self.options.corrector.tol && x.distance(last) <= 2.0 * span + 1e-9).then_some(x)
    }

    fn match_exit(&self, x: &LocusPoint) -> Option<usize> {
        self.exits
            .iter()
            .filter(|(_, c)| (c.omega - x.omega.abs()).abs() <= TOL_MATCH_OMEGA && (c.kval - x.kval).abs() <= TOL_MATCH_K)
            .min_by(|a, b| {
                let da = (a.1.omega - x.omega.abs()).abs();
                let db = (b.1.omega - x.omega.abs()).abs();
                da.total_cmp(&db)
            })
            .map(|(i, _)| *i)
    }
}

/// Follows one trajectory from its seed until a termination event.
fn trace(ctx: &Context, seed: &Seed) -> Trajectory {
    let mut points = seed.points.clone();
    let finish = |points: Vec<LocusPoint>, termination: Termination| Trajectory {
        origin: seed.origin,
        points,
        termination,
        sign: ctx.eq.sign,
        mirrored: false,
    };
    let failure = |points: Vec<LocusPoint>, reason: String| finish(points, Termination::StepFailure { reason });

    let lnk = ctx.lnkmax();
    let start = *points.last().expect("seed has a point");
    if start.kval > lnk {
        // seeds already past the cap only arise for tiny caps at pole starts
        let pole = points[0];
        let guess = pole.s() + (start.s() - pole.s()) * (lnk - start.kval).exp();
        return match ctx
            .eq
            .solve_frozen_gain(guess, lnk, 1e-3 * ctx.options.corrector.tol, 30, seed.real_axis)
        {
            Ok(s) => finish(vec![pole, LocusPoint::from_s(s, lnk)], Termination::GainCap),
            Err(e) => failure(vec![pole], e.to_string()),
        };
    }
    if start.kval == lnk {
        return finish(points, Termination::GainCap);
    }

    let mut ctl = ctx.options.controller;
    let mut dir = seed.direction;
    let settings = ctx.settings(seed.real_axis);
    // after a rejection the step may not grow again until a point is
    // accepted, otherwise shrink and growth can cycle forever
    let mut ceiling = f64::INFINITY;
    let reject = |ctl: &mut StepController, ceiling: &mut f64| {
        let r = ctl.shrink();
        *ceiling = ctl.h;
        r
    };
    for _ in 0..ctx.options.max_steps {
        let last = *points.last().expect("non-empty");
        let reach = ctx.singularity_distance(last.s()) * SINGULAR_REACH;
        let ds_dh = dir.components()[0].hypot(dir.components()[1]);
        if ds_dh * ctl.h > reach {
            ctl.h = (reach / ds_dh).max(ctl.h_min);
        }
        let predicted = predict(&last, &dir, ctl.h);
        let outcome = match ctx.eq.correct(&predicted, &dir, &settings) {
            Ok(o) => o,
            Err(e) => {
                if reject(&mut ctl, &mut ceiling).is_err() {
                    return failure(points, e.to_string());
                }
                continue;
            }
        };
        let h_used = ctl.h;
        match ctl.step_update(&outcome) {
            Ok((h, repeat)) => {
                ctl.h = h.min(ceiling);
                if repeat {
                    continue;
                }
            }
            Err(e) => return failure(points, e.to_string()),
        }
        let new = outcome.point;

        // K is infinite at real poles and zeros, so a real-axis step can never
        // legitimately pass one; doing so means the corrector switched curves
        if seed.real_axis && ctx.straddles_real_root(last.sigma, new.sigma) {
            if let Err(e) = reject(&mut ctl, &mut ceiling) {
                return failure(points, e.to_string());
            }
            continue;
        }

        // checked before the jump guard: a prediction aimed at a branch passes
        // through it even when the corrector then lands on a departing ray far
        // from the prediction; a corrected point is only trusted as evidence
        // when the step would be accepted anyway
        let correction = new.distance(&predicted);
        let trusted = correction <= JUMP_RATIO * h_used + 10.0 * settings.tol;
        let mut candidates = ctx.capture_candidates(&last, &predicted, seed.exclude_branch);
        if candidates.is_empty() && trusted {
            candidates = ctx.capture_candidates(&last, &new, seed.exclude_branch);
        }
        let resolvable = h_used > REFINE_FLOOR * ctl.h_min;
        if candidates.len() > 1 && resolvable {
            // several branches within reach: shorten the step until one is left
            if let Err(e) = reject(&mut ctl, &mut ceiling) {
                return failure(points, e.to_string());
            }
            continue;
        }
        if let Some(c) = pick(&candidates) {
            let b = c.branch;
            while points.len() > 1 && points.last().is_some_and(|p| p.kval >= b.kval) {
                points.pop();
            }
            points.push(LocusPoint::from_s(b.s, b.kval));
            return finish(points, Termination::ReachedBranch { branch: c.index });
        }

        // a correction comparable to the step itself means the corrector
        // converged onto a neighbouring curve
        if !trusted {
            if let Err(e) = reject(&mut ctl, &mut ceiling) {
                return failure(points, e.to_string());
            }
            continue;
        }

        if new.kval <= last.kval {
            if let Err(e) = reject(&mut ctl, &mut ceiling) {
                return failure(points, e.to_string());
            }
            continue;
        }

        if new.sigma >= ctx.region.sigma0 && resolvable && ctx.skips_exit(&last, &new) {
            if let Err(e) = reject(&mut ctl, &mut ceiling) {
                return failure(points, e.to_string());
            }
            continue;
        }

        let exits = new.sigma < ctx.region.sigma0;
        let capped = new.kval > lnk;
        if exits || capped {
            let t_exit = if exits {
                (last.sigma - ctx.region.sigma0) / (last.sigma - new.sigma)
            } else {
                f64::INFINITY
            };
            let t_cap = if capped {
                (lnk - last.kval) / (new.kval - last.kval)
            } else {
                f64::INFINITY
            };
            let end = if t_exit < t_cap {
                ctx.refine_exit(&last, &new, seed.real_axis)
                    .filter(|x| x.kval <= lnk && x.kval > last.kval)
                    .map(|x| (x, Termination::LeftRegion { matched: ctx.match_exit(&x) }))
            } else {
                ctx.refine_gain_cap(&last, &new, seed.real_axis)
                    .filter(|x| x.sigma >= ctx.region.sigma0 - TOL_EXIT)
                    .map(|x| (x, Termination::GainCap))
            };
            match end {
                Some((x, termination)) => {
                    points.push(x);
                    return finish(points, termination);
                }
                None => {
                    if let Err(e) = reject(&mut ctl, &mut ceiling) {
                        return failure(points, e.to_string());
                    }
                    continue;
                }
            }
        }

        if let Some(d) = Direction3::between(&last, &new) {
            dir = d;
        }
        points.push(new);
        ceiling = f64::INFINITY;
    }
    failure(points, format!("exceeded {} steps", ctx.options.max_steps))
}

/// Distance from `p` to the segment `[a, b]` and the closest point.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist: f64,
    t: f64,
    index: usize,
    branch: BranchPoint,
}

/// The nearest candidate; among equally near ones the first along the chord.
fn pick(candidates: &[Candidate]) -> Option<&Candidate> {
    let nearest = candidates.iter().map(|c| c.dist).fold(f64::INFINITY, f64::min);
    candidates
        .iter()
        .filter(|c| c.dist <= nearest + 1e-9 * (1.0 + c.branch.s.norm()))
        .min_by(|a, b| a.t.total_cmp(&b.t))
}

/// s-plane distance from `p` to the projection of segment `ab`, and the
/// unclamped position of the foot of the perpendicular along it.
fn segment_distance(p: Complex64, a: &LocusPoint, b: &LocusPoint) -> (f64, f64) {
    let (pa, ab) = (p - a.s(), b.s() - a.s());
    let len2 = ab.norm_sqr();
    let t = if len2 > 0.0 { (pa * ab.conj()).re / len2 } else { 0.0 };
    let foot = a.s() + ab * t.clamp(0.0, 1.0);
    ((p - foot).norm(), t)
}

fn mirror_of(t: &Trajectory, plant: &Plant, branches: &[BranchPoint]) -> Trajectory {
    let conj_branch = |i: usize| {
        let target = branches[i].s.conj();
        branches
            .iter()
            .position(|b| b.sign == branches[i].sign && b.s == target)
            .unwrap_or(i)
    };
    let origin = match t.origin {
        Origin::OpenLoopPole { index, angle } => {
            let target = plant.poles()[index].conj();
            let index = plant.poles().iter().position(|p| *p == target).unwrap_or(index);
            Origin::OpenLoopPole { index, angle: -angle }
        }
        Origin::BoundaryEntry { crossing } => Origin::BoundaryEntry { crossing },
        Origin::BranchContinuation { branch, angle } => Origin::BranchContinuation {
            branch: conj_branch(branch),
            angle: -angle,
        },
    };
    let termination = match &t.termination {
        Termination::ReachedBranch { branch } => Termination::ReachedBranch {
            branch: conj_branch(*branch),
        },
        other => other.clone(),
    };
    Trajectory {
        origin,
        points: t.points.iter().map(LocusPoint::conj).collect(),
        termination,
        sign: t.sign,
        mirrored: true,
    }
}

/// Drops trajectories whose endpoint duplicates a longer one's.
fn dedup_endpoints(trajectories: &mut Vec<Trajectory>) {
    let terminal = |t: &Trajectory| matches!(t.termination, Termination::GainCap | Termination::LeftRegion { .. });
    let mut keep = vec![true; trajectories.len()];
    for i in 0..trajectories.len() {
        for j in i + 1..trajectories.len() {
            let (a, b) = (&trajectories[i], &trajectories[j]);
            if !keep[i] || !keep[j] || !terminal(a) || !terminal(b) || a.sign != b.sign {
                continue;
            }
            let (Some(pa), Some(pb)) = (a.last(), b.last()) else { continue };
            if pa.distance(pb) <= 1e-8 {
                if a.points.len() >= b.points.len() {
                    keep[j] = false;
                } else {
                    keep[i] = false;
                }
            }
        }
    }
    let mut flags = keep.into_iter();
    trajectories.retain(|_| flags.next().unwrap_or(true));
}

impl RootLocusResult {
    /// Checks the result's structural invariants; returns one message per violation.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let sigma0 = self.region.sigma0;
        for (n, t) in self.trajectories.iter().enumerate() {
            let eq = LocusEquation::new(&self.plant, t.sign);
            for w in t.points.windows(2) {
                if w[1].kval <= w[0].kval {
                    issues.push(format!("trajectory {n}: gain not increasing at sigma = {}", w[1].sigma));
                }
            }
            for p in t.points.iter().filter(|p| p.kval.is_finite()) {
                if p.sigma < sigma0 - TOL_EXIT {
                    issues.push(format!("trajectory {n}: point left of the boundary at sigma = {}", p.sigma));
                }
                match point_residual(&eq, p) {
                    Some(r) if r <= 1e-5 => {}
                    r => issues.push(format!("trajectory {n}: residual {r:?} at {p:?}")),
                }
            }
        }
        for (i, c) in self.crossings.inward.iter().enumerate() {
            let count = self
                .trajectories
                .iter()
                .filter(|t| t.origin == Origin::BoundaryEntry { crossing: i })
                .filter(|t| t.points.first().is_some_and(|p| p.omega == c.omega))
                .count();
            if count != 1 {
                issues.push(format!("inward crossing {i} starts {count} trajectories"));
            }
        }
        for (i, b) in self.branch_points.iter().enumerate() {
            if !b.active {
                continue;
            }
            let arrivals = self
                .trajectories
                .iter()
                .filter(|t| t.termination == Termination::ReachedBranch { branch: i })
                .count();
            let departures = self
                .trajectories
                .iter()
                .filter(|t| matches!(t.origin, Origin::BranchContinuation { branch, .. } if branch == i))
                .count();
            if arrivals + departures > 0 && (arrivals < 2 || departures < b.multiplicity) {
                issues.push(format!(
                    "branch point {i} at {} has {arrivals} arrivals and {departures} departures",
                    b.s
                ));
            }
        }
        issues
    }

    pub fn max_residual(&self) -> f64 {
        self.trajectories
            .iter()
            .flat_map(|t| {
                let eq = LocusEquation::new(&self.plant, t.sign);
                t.points
                    .iter()
                    .filter(|p| p.kval.is_finite())
                    .map(move |p| point_residual(&eq, p).unwrap_or(f64::INFINITY))
            })
            .fold(0.0, f64::max)
    }
}

/// `|1 - e^{M + jP}|`, i.e. `|1 + k G(s) e^{-hs}|`.
pub fn point_residual(eq: &LocusEquation, p: &LocusPoint) -> Option<f64> {
    let (m, ph) = eq.residuals(p).ok()?;
    Some((Complex64::new(1.0, 0.0) - Complex64::new(m, ph).exp()).norm())
}
