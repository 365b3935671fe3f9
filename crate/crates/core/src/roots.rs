//! All roots of a complex polynomial by simultaneous iteration.
//!
//! The polynomial is made monic and its variable rescaled so the roots sit
//! near the unit circle. Durand–Kerner runs first; if it stalls, Aberth's
//! method continues from the last iterate. Each root is then polished by
//! Newton steps on the original polynomial and nearby roots are merged into
//! clusters with a multiplicity.

use std::f64::consts::PI;

use crate::scalar::Complex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Roots closer than `cluster·(1+|z|)` are merged.
    pub cluster: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol: 1e-14,
            max_iter: 1000,
            cluster: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub value: Complex,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSolve {
    pub roots: Vec<Cluster>,
    pub iterations: usize,
    pub converged: bool,
}

fn horner(c: &[Complex], x: Complex) -> Complex {
    c.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &k| acc * x + k)
}

fn horner_with_derivative(c: &[Complex], x: Complex) -> (Complex, Complex) {
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &k in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + k;
    }
    (p, dp)
}

/// Cauchy-type radius `max_k |c_k/c_n|^{1/(n−k)}`.
fn root_radius(c: &[Complex]) -> f64 {
    let n = c.len() - 1;
    let lead = c[n].norm();
    (0..n)
        .map(|k| (c[k].norm() / lead).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
}

fn durand_kerner(c: &[Complex], z: &mut [Complex], opts: &RootOptions) -> (usize, bool) {
    let n = z.len();
    for it in 1..=opts.max_iter {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex::new(f64::EPSILON, 0.0);
            }
            let step = horner(c, z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm() / (1.0 + z[i].norm()));
        }
        if delta <= opts.tol {
            return (it, true);
        }
    }
    (opts.max_iter, false)
}

fn aberth(c: &[Complex], z: &mut [Complex], opts: &RootOptions) -> (usize, bool) {
    let n = z.len();
    for it in 1..=opts.max_iter {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner_with_derivative(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut sum = Complex::new(0.0, 0.0);
            for j in 0..n {
                if i != j {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        sum += Complex::new(1.0, 0.0) / d;
                    }
                }
            }
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                delta = delta.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if delta <= opts.tol {
            return (it, true);
        }
    }
    (opts.max_iter, false)
}

fn newton_polish(c: &[Complex], x: Complex) -> Complex {
    let mut x = x;
    let mut best = (horner(c, x).norm(), x);
    for _ in 0..8 {
        let (p, dp) = horner_with_derivative(c, x);
        if dp.norm() == 0.0 {
            break;
        }
        x -= p / dp;
        let r = horner(c, x).norm();
        if r < best.0 {
            best = (r, x);
        } else {
            break;
        }
    }
    best.1
}

/// Roots of `Σ c_k x^k` (ascending coefficients).
pub fn find_roots(coeffs: &[Complex], opts: &RootOptions) -> RootSolve {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut c: Vec<Complex> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| v.norm() <= 1e-300_f64.max(scale * 1e-15)) {
        c.pop();
    }
    let mut zeros = 0;
    while c.len() > 1 && c[0].norm() == 0.0 {
        c.remove(0);
        zeros += 1;
    }
    let mut roots: Vec<Complex> = vec![Complex::new(0.0, 0.0); zeros];
    let deg = c.len() - 1;
    let mut iterations = 0;
    let mut converged = true;
    if deg == 1 {
        roots.push(-c[0] / c[1]);
    } else if deg > 1 {
        let lead = c[deg];
        let rho = root_radius(&c).max(f64::MIN_POSITIVE);
        // monic polynomial in y = x/ρ
        let balanced: Vec<Complex> = c
            .iter()
            .enumerate()
            .map(|(k, &v)| v / lead * rho.powi(k as i32) / rho.powi(deg as i32))
            .collect();
        let mut z: Vec<Complex> = (0..deg)
            .map(|k| Complex::from_polar(0.9, 2.0 * PI * k as f64 / deg as f64 + 0.4))
            .collect();
        let (it, ok) = durand_kerner(&balanced, &mut z, opts);
        iterations += it;
        converged = ok;
        if !ok {
            let (it, ok) = aberth(&balanced, &mut z, opts);
            iterations += it;
            converged = ok;
        }
        roots.extend(z.into_iter().map(|y| newton_polish(&c, y * rho)));
    }
    RootSolve {
        roots: cluster(roots, opts.cluster),
        iterations,
        converged,
    }
}

fn cluster(mut roots: Vec<Complex>, tol: f64) -> Vec<Cluster> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<(Complex, usize)> = Vec::new();
    for r in roots {
        match out
            .iter_mut()
            .find(|(c, m)| ((*c / *m as f64) - r).norm() <= tol * (1.0 + r.norm()))
        {
            Some(slot) => {
                slot.0 += r;
                slot.1 += 1;
            }
            None => out.push((r, 1)),
        }
    }
    out.into_iter()
        .map(|(sum, m)| Cluster {
            value: sum / m as f64,
            multiplicity: m,
        })
        .collect()
}
