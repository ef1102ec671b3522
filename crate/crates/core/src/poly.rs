//! Real-coefficient polynomials and their roots.
//!
//! Coefficients are stored in ascending degree order, so `coeffs[d]` multiplies
//! `x^d`. Roots are found with the Aberth–Ehrlich simultaneous iteration,
//! started from Newton-polygon radii and finished with Newton polishing.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("the zero polynomial has no well-defined root set")]
    ZeroPolynomial,
    #[error("root iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
}

/// Polynomial with real coefficients, ascending degree order.
#[derive(Clone, PartialEq, Default)]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl fmt::Debug for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealPolynomial{:?}", self.coeffs)
    }
}

/// Which arithmetic operation [`arith`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

impl RealPolynomial {
    /// Builds a polynomial from ascending coefficients, trimming trailing zeros.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    /// Monic polynomial with the given roots. Roots must be closed under
    /// conjugation; each pair is expanded as one real quadratic factor and
    /// roots with negative imaginary part are assumed to be covered by
    /// their partner.
    pub fn from_conjugate_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::constant(1.0);
        for r in roots {
            if r.im > 0.0 {
                p = &p * &Self::new(vec![r.norm_sqr(), -2.0 * r.re, 1.0]);
            } else if r.im == 0.0 {
                p = &p * &Self::new(vec![-r.re, 1.0]);
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect::<Vec<_>>())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(d, c)| d as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// All complex roots with default tolerances.
    pub fn complex_roots(&self) -> Result<RootSet, PolyError> {
        self.complex_roots_with(&RootOptions::default())
    }

    pub fn complex_roots_with(&self, opts: &RootOptions) -> Result<RootSet, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let mut raw = Vec::with_capacity(self.degree());
        let zeros_at_origin = self.coeffs.iter().take_while(|c| **c == 0.0).count();
        raw.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros_at_origin));

        let scale = self.max_abs_coeff();
        let reduced: Vec<f64> = self.coeffs[zeros_at_origin..]
            .iter()
            .map(|c| c / scale)
            .collect();
        match reduced.len() {
            0 | 1 => {}
            2 => raw.push(Complex64::new(-reduced[0] / reduced[1], 0.0)),
            _ => {
                let mut found = aberth(&reduced, opts.max_sweeps)?;
                for z in found.iter_mut() {
                    *z = polish(&reduced, *z);
                }
                raw.extend(found);
            }
        }
        let symmetric = enforce_conjugate_pairs(raw, opts.cluster_tol);
        Ok(RootSet {
            roots: cluster(symmetric, opts.cluster_tol),
        })
    }

    /// Non-negative real roots, ascending, with multiplicities.
    pub fn nonneg_real_roots(&self) -> Vec<(f64, usize)> {
        self.nonneg_real_roots_with(&RootOptions::default())
    }

    pub fn nonneg_real_roots_with(&self, opts: &RootOptions) -> Vec<(f64, usize)> {
        let Ok(set) = self.complex_roots_with(opts) else {
            return Vec::new();
        };
        let mut out: Vec<(f64, usize)> = set
            .roots
            .iter()
            .filter(|r| r.value.im.abs() <= opts.tol_imag && r.value.re >= -opts.tol_imag)
            .map(|r| (r.value.re.max(0.0), r.multiplicity))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

impl Add for &RealPolynomial {
    type Output = RealPolynomial;

    fn add(self, rhs: &RealPolynomial) -> RealPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        RealPolynomial::new(
            (0..n)
                .map(|i| at(&self.coeffs, i) + at(&rhs.coeffs, i))
                .collect::<Vec<_>>(),
        )
    }
}

impl Neg for &RealPolynomial {
    type Output = RealPolynomial;

    fn neg(self) -> RealPolynomial {
        RealPolynomial::new(self.coeffs.iter().map(|c| -c).collect::<Vec<_>>())
    }
}

impl Sub for &RealPolynomial {
    type Output = RealPolynomial;

    fn sub(self, rhs: &RealPolynomial) -> RealPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &RealPolynomial {
    type Output = RealPolynomial;

    fn mul(self, rhs: &RealPolynomial) -> RealPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return RealPolynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPolynomial::new(out)
    }
}

/// `a op b`, normalized.
pub fn arith(a: &RealPolynomial, b: &RealPolynomial, op: PolyOp) -> RealPolynomial {
    match op {
        PolyOp::Add => a + b,
        PolyOp::Sub => a - b,
        PolyOp::Mul => a * b,
    }
}

/// Tolerances for root finding.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Relative residual bound a returned root must satisfy.
    pub tol_root: f64,
    /// Largest imaginary part still treated as a real root.
    pub tol_imag: f64,
    /// Roots closer than `cluster_tol * (1 + |r|)` are merged into one
    /// multiple root.
    pub cluster_tol: f64,
    pub max_sweeps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol_root: 1e-8,
            tol_imag: 1e-8,
            cluster_tol: 1e-6,
            max_sweeps: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots of a polynomial with multiplicities, in conjugate-symmetric form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootSet {
    pub roots: Vec<Root>,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Roots repeated according to their multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect()
    }

    /// Largest `|p(r)| / (max|coeff| * max(1,|r|)^deg)` over the set.
    pub fn max_scaled_residual(&self, p: &RealPolynomial) -> f64 {
        let scale = p.max_abs_coeff();
        let deg = p.degree() as i32;
        self.roots
            .iter()
            .map(|r| p.eval_complex(r.value).norm() / (scale * r.value.norm().max(1.0).powi(deg)))
            .fold(0.0, f64::max)
    }
}

fn horner_with_derivative(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Rounding-error scale of Horner evaluation at `|z|`.
fn horner_bound(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.abs())
}

/// Starting radii from the upper convex hull of `(i, ln|a_i|)`.
fn initial_guesses(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(i, a)| (i, a.abs().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (i1, y1) = hull[hull.len() - 2];
            let (i2, y2) = hull[hull.len() - 1];
            let cross = (i2 as f64 - i1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - i1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut guesses = Vec::with_capacity(n);
    let tau = std::f64::consts::TAU;
    for w in hull.windows(2) {
        let (i, yi) = w[0];
        let (j, yj) = w[1];
        let count = j - i;
        let radius = ((yi - yj) / count as f64).exp();
        for k in 0..count {
            let angle = tau * (k as f64) / (count as f64) + tau * (i as f64) / (n as f64) + 0.4;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

fn aberth(c: &[f64], max_sweeps: usize) -> Result<Vec<Complex64>, PolyError> {
    let n = c.len() - 1;
    let mut z = initial_guesses(c);
    debug_assert_eq!(z.len(), n);
    let mut done = vec![false; n];
    let eps = f64::EPSILON;
    for _ in 0..max_sweeps {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = horner_with_derivative(c, z[k]);
            if p.norm() <= 4.0 * eps * horner_bound(c, z[k].norm()) {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                // coincident iterates; nudge apart
                let bump = Complex64::new(1e-8, 1e-8) * (1.0 + z[k].norm());
                z[k] += bump;
                continue;
            }
            z[k] -= step;
            if step.norm() <= eps * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|d| *d) {
            return Ok(z);
        }
    }
    // Multiple roots converge linearly and may not meet the strict test;
    // accept if every iterate is at least a good approximation.
    let ok = z.iter().all(|&zk| {
        let (p, _) = horner_with_derivative(c, zk);
        p.norm() <= 1e-10 * horner_bound(c, zk.norm())
    });
    if ok {
        Ok(z)
    } else {
        Err(PolyError::NoConvergence(max_sweeps))
    }
}

fn polish(c: &[f64], mut z: Complex64) -> Complex64 {
    let (mut p, mut dp) = horner_with_derivative(c, z);
    for _ in 0..5 {
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, dpc) = horner_with_derivative(c, cand);
        if pc.norm() < p.norm() {
            z = cand;
            p = pc;
            dp = dpc;
        } else {
            break;
        }
    }
    z
}

fn enforce_conjugate_pairs(mut roots: Vec<Complex64>, pair_tol: f64) -> Vec<Complex64> {
    roots.sort_by(|a, b| b.im.abs().total_cmp(&a.im.abs()));
    let n = roots.len();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if used[i] {
            continue;
        }
        let zi = roots[i];
        let tiny = 1e-14 * (1.0 + zi.norm());
        if zi.im.abs() > tiny {
            let target = zi.conj();
            let partner = (0..n)
                .filter(|&j| j != i && !used[j] && roots[j].im * zi.im < 0.0)
                .map(|j| (j, (roots[j] - target).norm()))
                .filter(|(_, d)| *d <= pair_tol * (1.0 + zi.norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((j, _)) = partner {
                used[i] = true;
                used[j] = true;
                let upper = if zi.im > 0.0 { zi } else { zi.conj() };
                let other = if zi.im > 0.0 { roots[j].conj() } else { roots[j] };
                let mean = (upper + other) * 0.5;
                out.push(mean);
                out.push(mean.conj());
                continue;
            }
        }
        used[i] = true;
        if zi.im.abs() <= 1e-6 * (1.0 + zi.norm()) {
            out.push(Complex64::new(zi.re, 0.0));
        } else {
            out.push(zi);
        }
    }
    out
}

fn cluster(values: Vec<Complex64>, tol: f64) -> Vec<Root> {
    // single-linkage grouping via union-find
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0 + values[i].norm().max(values[j].norm());
            if (values[i] - values[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let g = find(&mut parent, i);
        match groups.iter_mut().find(|(id, _, _)| *id == g) {
            Some(entry) => {
                entry.1 += values[i];
                entry.2 += 1;
            }
            None => groups.push((g, values[i], 1)),
        }
    }
    let mut roots: Vec<Root> = groups
        .into_iter()
        .map(|(_, sum, count)| {
            let mut value = sum / count as f64;
            if value.im.abs() <= 0.5 * tol * (1.0 + value.norm()) {
                value.im = 0.0;
            }
            Root {
                value,
                multiplicity: count,
            }
        })
        .collect();
    // centroid sums are order dependent; make partners exact conjugates
    let n = roots.len();
    let mut fixed = vec![false; n];
    for i in 0..n {
        if roots[i].value.im <= 0.0 || fixed[i] {
            continue;
        }
        let target = roots[i].value.conj();
        let partner = (0..n)
            .filter(|&j| !fixed[j] && roots[j].value.im < 0.0)
            .min_by(|&a, &b| {
                (roots[a].value - target)
                    .norm()
                    .total_cmp(&(roots[b].value - target).norm())
            });
        if let Some(j) = partner {
            roots[j].value = target;
            fixed[j] = true;
        }
        fixed[i] = true;
    }
    roots.sort_by(|a, b| match a.value.re.total_cmp(&b.value.re) {
        Ordering::Equal => b.value.im.total_cmp(&a.value.im),
        o => o,
    });
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[f64]) -> RealPolynomial {
        RealPolynomial::new(c.to_vec())
    }

    fn assert_root_set(found: &RootSet, expected: &[Complex64], tol: f64) {
        let vals = found.expanded();
        assert_eq!(vals.len(), expected.len(), "{found:?}");
        for e in expected {
            assert!(
                vals.iter().any(|v| (v - e).norm() <= tol),
                "missing {e} in {vals:?}"
            );
        }
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(&p(&[1.0, 1.0]) * &p(&[1.0, -1.0]), p(&[1.0, 0.0, -1.0]));
    }

    #[test]
    fn adding_zero_is_identity() {
        let a = p(&[3.0, -2.0, 5.0]);
        assert_eq!(arith(&a, &RealPolynomial::zero(), PolyOp::Add), a);
        assert_eq!(arith(&a, &a, PolyOp::Sub), RealPolynomial::zero());
    }

    #[test]
    fn example_plant_denominator_times_numerator() {
        let num = p(&[50.0, -10.0, 1.0]);
        let den = p(&[1.25, 4.25, 4.0, 1.0]);
        assert_eq!(
            arith(&num, &den, PolyOp::Mul),
            p(&[62.5, 200.0, 158.75, 14.25, -6.0, 1.0])
        );
    }

    #[test]
    fn derivatives() {
        assert_eq!(p(&[1.25, 4.25, 4.0, 1.0]).derivative(), p(&[4.25, 8.0, 3.0]));
        assert!(p(&[7.0]).derivative().is_zero());
        assert_eq!(p(&[50.0, -10.0, 1.0]).derivative(), p(&[-10.0, 2.0]));
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let a = p(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(a.degree(), 1);
        assert_eq!(a.coeffs(), &[1.0, 2.0]);
    }

    #[test]
    fn cubic_denominator_roots() {
        let roots = p(&[1.25, 4.25, 4.0, 1.0]).complex_roots().unwrap();
        let c = |re| Complex64::new(re, 0.0);
        assert_root_set(&roots, &[c(-0.5), c(-1.0), c(-2.5)], 1e-12);
        for r in &roots.roots {
            assert_eq!(r.value.im, 0.0);
        }
    }

    #[test]
    fn quadratic_numerator_roots() {
        let roots = p(&[50.0, -10.0, 1.0]).complex_roots().unwrap();
        assert_root_set(
            &roots,
            &[Complex64::new(5.0, 5.0), Complex64::new(5.0, -5.0)],
            1e-12,
        );
        assert_eq!(roots.roots[0].value, roots.roots[1].value.conj());
    }

    #[test]
    fn unit_circle_pair() {
        let roots = p(&[1.0, 0.0, 1.0]).complex_roots().unwrap();
        assert_root_set(
            &roots,
            &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)],
            1e-14,
        );
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert_eq!(
            RealPolynomial::zero().complex_roots(),
            Err(PolyError::ZeroPolynomial)
        );
    }

    #[test]
    fn double_root_at_origin() {
        assert_eq!(p(&[0.0, 0.0, -1.0]).nonneg_real_roots(), vec![(0.0, 2)]);
    }

    #[test]
    fn only_nonnegative_roots_kept() {
        let r = p(&[0.25, 0.0, -1.0]).nonneg_real_roots();
        assert_eq!(r.len(), 1);
        assert!((r[0].0 - 0.5).abs() < 1e-14);
        assert_eq!(r[0].1, 1);
    }

    #[test]
    fn detects_multiplicity_of_repeated_roots() {
        // (x - 2)^2 (x + 1)^2 (x^2 + 1); triple roots are only resolved to
        // about eps^(1/3), outside the clustering radius
        let mut q = RealPolynomial::constant(1.0);
        for f in [[-2.0, 1.0], [-2.0, 1.0], [1.0, 1.0], [1.0, 1.0]] {
            q = &q * &p(&f);
        }
        q = &q * &p(&[1.0, 0.0, 1.0]);
        let roots = q.complex_roots().unwrap();
        assert_eq!(roots.total_multiplicity(), 6);
        let mult = |z: Complex64| {
            roots
                .roots
                .iter()
                .find(|r| (r.value - z).norm() < 1e-4)
                .map(|r| r.multiplicity)
        };
        assert_eq!(mult(Complex64::new(2.0, 0.0)), Some(2));
        assert_eq!(mult(Complex64::new(-1.0, 0.0)), Some(2));
        assert_eq!(mult(Complex64::new(0.0, 1.0)), Some(1));
    }

    #[test]
    fn wildly_scaled_coefficients() {
        // roots 1e-3, 1, 1e3, 1e5
        let mut q = RealPolynomial::constant(1.0);
        for r in [1e-3, 1.0, 1e3, 1e5] {
            q = &q * &p(&[-r, 1.0]);
        }
        let roots = q.complex_roots().unwrap();
        for (r, e) in roots.roots.iter().zip([1e-3, 1.0, 1e3, 1e5]) {
            assert!((r.value.re - e).abs() <= 1e-10 * e, "{r:?} vs {e}");
        }
    }

    #[test]
    fn conjugate_polynomial_roundtrip() {
        let zs = [
            Complex64::new(5.0, 5.0),
            Complex64::new(5.0, -5.0),
            Complex64::new(-1.0, 0.0),
        ];
        let q = RealPolynomial::from_conjugate_roots(&zs);
        assert_eq!(q, p(&[50.0, 40.0, -9.0, 1.0]));
    }

    fn int_poly() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-9i64..=9, 1..=11)
    }

    fn int_mul(a: &[i64], b: &[i64]) -> Vec<i128> {
        let mut out = vec![0i128; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += (*x as i128) * (*y as i128);
            }
        }
        out
    }

    fn as_poly(v: &[i64]) -> RealPolynomial {
        RealPolynomial::new(v.iter().map(|c| *c as f64).collect::<Vec<_>>())
    }

    fn trimmed(v: Vec<i128>) -> Vec<f64> {
        let mut v: Vec<f64> = v.into_iter().map(|c| c as f64).collect();
        while v.last() == Some(&0.0) {
            v.pop();
        }
        v
    }

    proptest! {
        #[test]
        fn integer_arithmetic_is_exact(a in int_poly(), b in int_poly()) {
            let (pa, pb) = (as_poly(&a), as_poly(&b));
            let prod = arith(&pa, &pb, PolyOp::Mul);
            prop_assert_eq!(prod.coeffs().to_vec(), trimmed(int_mul(&a, &b)));
            let n = a.len().max(b.len());
            let sum: Vec<i128> = (0..n)
                .map(|i| *a.get(i).unwrap_or(&0) as i128 - *b.get(i).unwrap_or(&0) as i128)
                .collect();
            prop_assert_eq!(arith(&pa, &pb, PolyOp::Sub).coeffs().to_vec(), trimmed(sum));
        }

        #[test]
        fn roots_satisfy_residual_bound_and_conjugation(
            c in prop::collection::vec(-10.0f64..10.0, 2..=13)
        ) {
            let q = RealPolynomial::new(c);
            prop_assume!(q.degree() >= 1 && q.leading().abs() > 1e-3);
            let roots = q.complex_roots().unwrap();
            prop_assert_eq!(roots.total_multiplicity(), q.degree());
            prop_assert!(roots.max_scaled_residual(&q) <= 1e-8);
            for r in &roots.roots {
                let conj_present = roots.roots.iter().any(|o| {
                    o.multiplicity == r.multiplicity && (o.value - r.value.conj()).norm() == 0.0
                });
                prop_assert!(conj_present);
            }
            let real = q.nonneg_real_roots();
            for (x, _) in real {
                prop_assert!(roots.roots.iter().any(|r| (r.value.re.max(0.0) - x).abs() == 0.0));
            }
        }
    }
}
