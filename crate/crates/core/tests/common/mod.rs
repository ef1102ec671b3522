#![allow(dead_code)]

use dtlocus::boundary::RegionSpec;
use dtlocus::plant::Plant;
use dtlocus::poly::RealPolynomial;
use dtlocus::tracer::TraceOptions;
use num_complex::Complex64;
use rand::rngs::StdRng;
use std::io::Write;
use rand::{Rng, SeedableRng};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `1/s · e^{-s}`.
pub fn single_pole() -> Plant {
    Plant::new(1.0, 1.0, vec![], vec![c(0.0, 0.0)]).unwrap()
}

/// `(s² - 10s + 50) / (s³ + 4s² + 4.25s + 1.25) · e^{-s}`.
pub fn example_plant() -> Plant {
    Plant::from_coefficients(
        &RealPolynomial::new(vec![50.0, -10.0, 1.0]),
        &RealPolynomial::new(vec![1.25, 4.25, 4.0, 1.0]),
        1.0,
    )
    .unwrap()
}

pub struct Case {
    pub name: &'static str,
    pub plant: Plant,
    pub region: RegionSpec,
    pub options: TraceOptions,
}

fn case(name: &'static str, plant: Plant, sigma0: f64, kmax: f64, negative_gains: bool) -> Case {
    Case {
        name,
        plant,
        region: RegionSpec::new(sigma0, kmax).unwrap(),
        options: TraceOptions {
            negative_gains,
            ..Default::default()
        },
    }
}

/// Fixed set of plants and regions exercised by the whole-locus checks.
pub fn corpus() -> Vec<Case> {
    vec![
        case("single pole", single_pole(), -2.0, 1.0, false),
        case("single pole, both signs", single_pole(), -2.0, 1.0, true),
        case("example plant", example_plant(), -3.5, 5.0, false),
        case("example plant, both signs", example_plant(), -3.5, 5.0, true),
        case(
            "complex poles",
            Plant::new(2.0, 0.5, vec![c(-3.0, 0.0)], vec![c(-1.0, 2.0), c(-1.0, -2.0), c(-0.5, 0.0)]).unwrap(),
            -2.0,
            3.0,
            false,
        ),
        case(
            "two real poles",
            Plant::new(1.0, 0.3, vec![], vec![c(-1.0, 0.0), c(-2.0, 0.0)]).unwrap(),
            -3.0,
            20.0,
            false,
        ),
        case(
            "unstable pole, right half-plane region",
            Plant::new(1.0, 1.0, vec![], vec![c(0.5, 0.0)]).unwrap(),
            0.2,
            2.0,
            false,
        ),
        case(
            "negative alpha",
            Plant::new(-1.5, 0.8, vec![c(-0.5, 0.0)], vec![c(-1.0, 0.0), c(-2.0, 1.0), c(-2.0, -1.0)]).unwrap(),
            -2.5,
            4.0,
            true,
        ),
    ]
}

/// Direct evaluation of `G(s)e^{-hs}` from the monic polynomials.
pub fn direct(plant: &Plant, s: Complex64) -> Complex64 {
    plant.alpha() * plant.numerator().eval_complex(s) / plant.denominator().eval_complex(s) * (-plant.delay() * s).exp()
}

/// Root of `D(s) + k α N(s) e^{-hs}` near `start`, by Newton on the
/// polynomial-exponential form.
pub fn closed_loop_root(plant: &Plant, k: f64, start: Complex64) -> Option<Complex64> {
    let (num, den) = (plant.numerator(), plant.denominator());
    let (dnum, dden) = (num.derivative(), den.derivative());
    let (a, h) = (plant.alpha(), plant.delay());
    let mut s = start;
    for _ in 0..60 {
        let e = (-h * s).exp();
        let f = den.eval_complex(s) + k * a * num.eval_complex(s) * e;
        let df = dden.eval_complex(s) + k * a * e * (dnum.eval_complex(s) - h * num.eval_complex(s));
        let step = f / df;
        s -= step;
        if !(s.re.is_finite() && s.im.is_finite()) {
            return None;
        }
        if step.norm() <= 1e-14 * (1.0 + s.norm()) {
            return Some(s);
        }
    }
    None
}

pub struct RandomCase {
    pub plant: Plant,
    pub region: RegionSpec,
}

fn random_roots(rng: &mut StdRng, count: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    while out.len() < count {
        let re = rng.gen_range(-4.0..1.0);
        if count - out.len() >= 2 && rng.gen_bool(0.5) {
            let im = rng.gen_range(0.2..5.0);
            out.push(c(re, im));
            out.push(c(re, -im));
        } else {
            out.push(c(re, 0.0));
        }
    }
    out
}

/// Strictly proper plants with `n ≤ 6`, `m ≤ 3` and `h ∈ [0.1, 2]`, each
/// with a boundary kept away from every pole and zero.
pub fn random_cases(count: usize, seed: u64) -> Vec<RandomCase> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(0..=(n - 1).min(3));
        let poles = random_roots(&mut rng, n);
        let zeros = random_roots(&mut rng, m);
        let alpha = rng.gen_range(0.5..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let delay = rng.gen_range(0.1..2.0);
        let sigma0 = rng.gen_range(-3.0..0.5);
        if poles.iter().chain(&zeros).any(|r| (r.re - sigma0).abs() < 0.05) {
            continue;
        }
        let kmax = 10f64.powf(rng.gen_range(-0.5..1.5));
        out.push(RandomCase {
            plant: Plant::new(alpha, delay, zeros, poles).unwrap(),
            region: RegionSpec::new(sigma0, kmax).unwrap(),
        });
    }
    out
}

/// Prints a single verdict line and turns the outcome into a test result.
/// Writes straight to the stdout handle so the line survives output capture.
pub fn report(label: &str, outcome: Result<String, String>) {
    let line = match &outcome {
        Ok(detail) => format!("PASS  {label}: {detail}\n"),
        Err(detail) => format!("FAIL  {label}: {detail}\n"),
    };
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    if let Err(detail) = outcome {
        panic!("{label} failed: {detail}");
    }
}
