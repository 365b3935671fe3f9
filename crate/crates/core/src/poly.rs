//! Dense univariate polynomials with ascending coefficient lists.

use crate::scalar::{Complex, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![])
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Poly::new(vec![S::zero(), S::one()])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut out = vec![S::zero(); k];
        out.extend(self.coeffs.iter().cloned());
        Poly::new(out)
    }

    /// Exact division by `z`, when the constant term vanishes.
    pub fn div_z(&self) -> Option<Self> {
        if !self.coeffs[0].is_zero() {
            return None;
        }
        if self.coeffs.len() == 1 {
            return Some(Poly::zero());
        }
        Some(Poly::new(self.coeffs[1..].to_vec()))
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * S::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_complex(&self, x: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, c| acc * x + c.to_complex())
    }

    pub fn to_complex(&self) -> Poly<Complex> {
        Poly::new(self.coeffs.iter().map(|c| c.to_complex()).collect())
    }
}

/// A coefficient that is affine in the summation index: `c0 + c1·n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine<S> {
    pub c0: S,
    pub c1: S,
}

impl<S: Scalar> Affine<S> {
    pub fn constant(c0: S) -> Self {
        Affine { c0, c1: S::zero() }
    }

    pub fn zero() -> Self {
        Affine::constant(S::zero())
    }

    pub fn at(&self, n: i64) -> S {
        self.c0.clone() + self.c1.clone() * S::from_i64(n)
    }

    pub fn add(&self, o: &Self) -> Self {
        Affine {
            c0: self.c0.clone() + o.c0.clone(),
            c1: self.c1.clone() + o.c1.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Affine {
            c0: self.c0.clone() - o.c0.clone(),
            c1: self.c1.clone() - o.c1.clone(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Affine {
            c0: self.c0.clone() * s.clone(),
            c1: self.c1.clone() * s.clone(),
        }
    }

    /// Identically zero in `n`, judged against `scale` in floating mode.
    pub fn vanishes(&self, scale: f64) -> bool {
        self.c0.is_negligible(scale) && self.c1.is_negligible(scale)
    }

    pub fn magnitude(&self) -> f64 {
        self.c0.magnitude() + self.c1.magnitude()
    }
}

/// Polynomial in `z` whose coefficients are affine in `n`.
pub type AffinePoly<S> = Vec<Affine<S>>;

/// `p(z)·(c0 + c1·n)` as a polynomial with affine coefficients.
pub fn poly_times_affine<S: Scalar>(p: &Poly<S>, a: &Affine<S>) -> AffinePoly<S> {
    p.coeffs
        .iter()
        .map(|c| Affine {
            c0: c.clone() * a.c0.clone(),
            c1: c.clone() * a.c1.clone(),
        })
        .collect()
}

pub fn affine_poly_add<S: Scalar>(a: &AffinePoly<S>, b: &AffinePoly<S>) -> AffinePoly<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_else(Affine::zero);
            let y = b.get(k).cloned().unwrap_or_else(Affine::zero);
            x.add(&y)
        })
        .collect()
}

pub fn affine_poly_from<S: Scalar>(p: &Poly<S>) -> AffinePoly<S> {
    p.coeffs.iter().cloned().map(Affine::constant).collect()
}
