#![allow(dead_code)]

use dche::expansions::{make_family, DcheParams, FamilyId, FamilyInstance, FamilyOptions};
use dche::{Complex, Rational, Scalar};
use rand::rngs::StdRng;
use rand::Rng;

pub fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Plain truncated power series of ₁F₁ with a fixed term count, no
/// transformations or early exit.
pub fn m_ref(a: Complex, b: Complex, x: Complex) -> Complex {
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..600 {
        let kf = k as f64;
        term = term * (a + kf) / ((b + kf) * (kf + 1.0)) * x;
        sum += term;
        if term.norm() == 0.0 {
            break;
        }
    }
    sum
}

/// d^k/dx^k ₁F₁(a; b; x) via the upper-shift rule.
pub fn m_ref_d(a: Complex, b: Complex, x: Complex, k: usize) -> Complex {
    let mut f = Complex::new(1.0, 0.0);
    for j in 0..k {
        f = f * (a + j as f64) / (b + j as f64);
    }
    f * m_ref(a + k as f64, b + k as f64, x)
}

pub fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Random rational with denominator 1..=den_max, numerator within ±num_max.
pub fn rand_rational(rng: &mut StdRng, num_max: i64, den_max: i64) -> Rational {
    let n = rng.gen_range(-num_max..=num_max);
    let d = rng.gen_range(1..=den_max);
    Rational::from_i64(n) / Rational::from_i64(d)
}

/// Random rational that is not a nonpositive integer.
pub fn rand_lower(rng: &mut StdRng) -> Rational {
    loop {
        let r = rand_rational(rng, 20, 7);
        if !r.is_nonpositive_integer() {
            return r;
        }
    }
}

pub fn rand_nonzero(rng: &mut StdRng) -> Rational {
    loop {
        let r = rand_rational(rng, 12, 5);
        if !r.is_zero() {
            return r;
        }
    }
}

/// Uniform real in a range, avoiding values within 0.05 of a nonpositive integer.
pub fn rand_lower_f(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    loop {
        let v: f64 = rng.gen_range(lo..hi);
        if v > 0.05 || (v - v.round()).abs() > 0.05 {
            return v;
        }
    }
}

/// Random exact instance of a family; `None` when the draw is inapplicable.
pub fn rational_draw(rng: &mut StdRng, family: FamilyId) -> Option<FamilyInstance<Rational>> {
    let mut p = DcheParams::new(
        rand_nonzero(rng),
        rand_lower(rng),
        rand_rational(rng, 10, 4),
        rand_nonzero(rng),
        rand_rational(rng, 10, 4),
    );
    let mut opts = FamilyOptions::default();
    match family {
        FamilyId::ThreeTermDeg => {
            p.delta = Rational::zero();
            let g0 = rand_lower(rng);
            let one = Rational::one();
            let g1 = one.clone() - p.gamma.clone();
            p.q = ((g0.clone() - one.clone()) * (g0.clone() - one) - g1.clone() * g1) / Rational::from_i64(4);
            if g0 < Rational::one() {
                opts.other_branch = true;
            }
        }
        FamilyId::FiveTerm => opts.gamma0 = Some(rand_lower(rng)),
        _ => {}
    }
    make_family(&p, family, &opts).ok()
}
