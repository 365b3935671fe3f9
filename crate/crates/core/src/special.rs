//! Kummer's confluent hypergeometric function ₁F₁ and the Pochhammer symbol.
//!
//! ₁F₁ is summed directly from its power series,
//!
//! ```text
//! M(a; b; x) = Σ_k (a)_k / (b)_k · x^k / k!,   t_{k+1}/t_k = (a+k) x / ((b+k)(k+1)).
//! ```
//!
//! When `a = -m` is a nonpositive integer the sum terminates after `m + 1`
//! terms and is exact in rational mode. Otherwise the series is summed in
//! floating point until three consecutive terms fall below `tol·|sum|`.
//!
//! Accuracy envelope: a double-precision sum loses roughly
//! `eps·Σ_k|t_k| / |M|` to cancellation. When that ratio exceeds
//! [`CANCELLATION_LIMIT`] the series is summed again in double-double
//! arithmetic, which keeps moderate arguments (|x| ≲ 20) at full double
//! accuracy. Non-terminating evaluations with `|x| > 50` are refused.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Scalar};

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_TERMS: usize = 10_000;
/// `Σ|t_k| / |Σ t_k|` above which the double-double sum is used.
pub const CANCELLATION_LIMIT: f64 = 64.0;
pub const MAX_ARGUMENT: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct KummerArgs<S> {
    pub a: S,
    pub b: S,
    pub x: S,
}

impl<S: Scalar> KummerArgs<S> {
    pub fn new(a: S, b: S, x: S) -> Self {
        KummerArgs { a, b, x }
    }

    /// Arguments of the k-th derivative rule: `(a+k; b+k; x)`.
    pub fn shifted(&self, k: i64) -> Self {
        KummerArgs {
            a: self.a.clone() + S::from_i64(k),
            b: self.b.clone() + S::from_i64(k),
            x: self.x.clone(),
        }
    }

    /// Number of terms of a terminating series (`a = -m` gives `m + 1`).
    pub fn terminating_length(&self) -> Option<usize> {
        match self.a.to_integer() {
            Some(m) if m <= 0 => Some((-m) as usize + 1),
            _ => None,
        }
    }

    /// Checks the lower parameter. A nonpositive integer `b = -p` is accepted
    /// only when the series terminates before the first vanishing
    /// denominator, i.e. `a = -m` with `m <= p`.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.b.to_integer().filter(|p| *p <= 0) {
            let p = (-p) as usize;
            match self.terminating_length() {
                Some(len) if len < p + 2 => Ok(()),
                _ => Err(Error::InvalidLowerParameter(format!(
                    "b = {} is a nonpositive integer and the series does not terminate before index {}",
                    -(p as i64),
                    p + 1
                ))),
            }
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            tol: DEFAULT_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

impl SeriesControl {
    pub fn with_tol(tol: f64) -> Self {
        SeriesControl {
            tol,
            ..Default::default()
        }
    }
}

/// Rising factorial `x(x+1)···(x+n-1)`; `1` for `n = 0`.
pub fn pochhammer<S: Scalar>(x: &S, n: usize) -> S {
    let mut acc = S::one();
    for k in 0..n {
        acc = acc * (x.clone() + S::from_i64(k as i64));
    }
    acc
}

/// `₁F₁(a; b; x)` with the default term cap.
pub fn kummer_m<S: Scalar>(args: &KummerArgs<S>, tol: f64) -> Result<S> {
    kummer_m_with(args, SeriesControl::with_tol(tol))
}

pub fn kummer_m_with<S: Scalar>(args: &KummerArgs<S>, ctl: SeriesControl) -> Result<S> {
    args.validate()?;
    if let Some(len) = args.terminating_length() {
        return Ok(terminating_sum(args, len));
    }
    if S::EXACT {
        return Err(Error::RequiresFloatingMode);
    }
    let x = args.x.magnitude();
    if x > MAX_ARGUMENT {
        return Err(Error::ArgumentTooLarge(x));
    }
    let a = args.a.to_complex();
    let b = args.b.to_complex();
    let z = args.x.to_complex();
    let sum = series_sum(a, b, z, ctl)?;
    S::from_complex(sum).ok_or(Error::RequiresFloatingMode)
}

fn terminating_sum<S: Scalar>(args: &KummerArgs<S>, len: usize) -> S {
    let mut term = S::one();
    let mut sum = S::one();
    for k in 0..len.saturating_sub(1) {
        let kk = S::from_i64(k as i64);
        term =
            term * (args.a.clone() + kk.clone()) * args.x.clone() / ((args.b.clone() + kk) * S::from_i64(k as i64 + 1));
        sum = sum + term.clone();
    }
    sum
}

fn series_sum(a: Complex, b: Complex, x: Complex, ctl: SeriesControl) -> Result<Complex> {
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    let mut mass = 1.0;
    let mut small = 0;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term = term * (a + kf) * x / ((b + kf) * (kf + 1.0));
        sum += term;
        mass += term.norm();
        if term.norm() <= ctl.tol * sum.norm() {
            small += 1;
            if small == 3 {
                if mass > CANCELLATION_LIMIT * sum.norm() {
                    return series_sum_dd(a, b, x, ctl);
                }
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence { terms: ctl.max_terms })
}

fn series_sum_dd(a: Complex, b: Complex, x: Complex, ctl: SeriesControl) -> Result<Complex> {
    let x = Cdd::from(x);
    let mut term = Cdd::from(Complex::new(1.0, 0.0));
    let mut sum = term;
    let mut small = 0;
    for k in 0..ctl.max_terms {
        let kf = Dd::from(k as f64);
        let num = Cdd::new(Dd::from(a.re).add(kf), Dd::from(a.im)).mul(x);
        let den = Cdd::new(Dd::from(b.re).add(kf), Dd::from(b.im)).scale(Dd::from(k as f64 + 1.0));
        term = term.mul(num).div(den);
        sum = sum.add(term);
        if term.norm() <= ctl.tol * sum.norm() {
            small += 1;
            if small == 3 {
                return Ok(sum.to_complex());
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence { terms: ctl.max_terms })
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        quick_two_sum(p, e)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        let q = quick_two_sum(q1, q2);
        q.add(Dd::from(q3))
    }
}

#[derive(Debug, Clone, Copy)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl From<Complex> for Cdd {
    fn from(c: Complex) -> Self {
        Cdd::new(Dd::from(c.re), Dd::from(c.im))
    }
}

impl Cdd {
    fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }

    fn add(self, o: Cdd) -> Cdd {
        Cdd::new(self.re.add(o.re), self.im.add(o.im))
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd::new(
            self.re.mul(o.re).sub(self.im.mul(o.im)),
            self.re.mul(o.im).add(self.im.mul(o.re)),
        )
    }

    fn scale(self, s: Dd) -> Cdd {
        Cdd::new(self.re.mul(s), self.im.mul(s))
    }

    fn div(self, o: Cdd) -> Cdd {
        let d = o.re.mul(o.re).add(o.im.mul(o.im));
        let n = self.mul(Cdd::new(o.re, o.im.neg()));
        Cdd::new(n.re.div(d), n.im.div(d))
    }

    fn norm(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    fn to_complex(self) -> Complex {
        Complex::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

/// `d/dx ₁F₁(a; b; x) = (a/b)·₁F₁(a+1; b+1; x)`.
pub fn kummer_m_derivative<S: Scalar>(args: &KummerArgs<S>, tol: f64) -> Result<S> {
    kummer_m_nth_derivative(args, 1, SeriesControl::with_tol(tol))
}

/// k-th derivative by repeated application of the differentiation rule:
/// `(a)_k / (b)_k · ₁F₁(a+k; b+k; x)`.
pub fn kummer_m_nth_derivative<S: Scalar>(args: &KummerArgs<S>, order: usize, ctl: SeriesControl) -> Result<S> {
    if order == 0 {
        return kummer_m_with(args, ctl);
    }
    let num = pochhammer(&args.a, order);
    if num.is_zero() {
        // a ∈ {0, -1, ..., 1-order}: the polynomial has degree < order.
        args.validate()?;
        return Ok(S::zero());
    }
    let den = pochhammer(&args.b, order);
    if den.is_zero() {
        return Err(Error::InvalidLowerParameter(
            "differentiation rule divides by a vanishing (b)_k".into(),
        ));
    }
    let shifted = args.shifted(order as i64);
    Ok(num / den * kummer_m_with(&shifted, ctl)?)
}
