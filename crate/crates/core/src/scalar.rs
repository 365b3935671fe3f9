//! Field elements used throughout the crate.
//!
//! Two instantiations are provided: exact arbitrary-precision rationals and
//! double-precision complex numbers. Derivations and coefficient recurrences
//! are generic over [`Scalar`]; evaluation of non-terminating Kummer series
//! always happens in [`Complex`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;
pub type Complex = Complex64;

/// Relative threshold under which a floating value counts as zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (field axioms hold bit for bit).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;

    /// Exact comparison with zero.
    fn is_zero(&self) -> bool;

    /// Zero test relative to `scale`. Exact scalars ignore the scale.
    fn is_negligible(&self, scale: f64) -> bool;

    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex;

    /// Embeds a floating value; exact scalars refuse.
    fn from_complex(c: Complex) -> Option<Self>;

    /// The integer value, when the scalar is one.
    fn to_integer(&self) -> Option<i64>;

    /// Principal square root, when representable.
    fn sqrt(&self) -> Option<Self>;

    fn to_repr(&self) -> ScalarRepr;
    fn from_repr(repr: &ScalarRepr) -> Option<Self>;

    fn is_nonpositive_integer(&self) -> bool {
        matches!(self.to_integer(), Some(k) if k <= 0)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negligible(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
    fn to_complex(&self) -> Complex {
        Complex::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_complex(_c: Complex) -> Option<Self> {
        None
    }
    fn to_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }
    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Exact(self.to_string())
    }
    fn from_repr(repr: &ScalarRepr) -> Option<Self> {
        match repr {
            ScalarRepr::Exact(s) => parse_rational(s),
            ScalarRepr::Complex { .. } => None,
        }
    }
}

impl Scalar for Complex {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex::new(v as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn is_negligible(&self, scale: f64) -> bool {
        self.norm() <= FLOAT_ZERO_TOL * scale.max(f64::MIN_POSITIVE)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex {
        *self
    }
    fn from_complex(c: Complex) -> Option<Self> {
        Some(c)
    }
    fn to_integer(&self) -> Option<i64> {
        let tol = FLOAT_ZERO_TOL * (1.0 + self.re.abs());
        let r = self.re.round();
        if self.im.abs() <= tol && (self.re - r).abs() <= tol && r.abs() < 9.0e15 {
            Some(r as i64)
        } else {
            None
        }
    }
    fn sqrt(&self) -> Option<Self> {
        Some(Complex64::sqrt(*self))
    }
    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Complex {
            re: self.re + 0.0,
            im: self.im + 0.0,
        }
    }
    fn from_repr(repr: &ScalarRepr) -> Option<Self> {
        match repr {
            ScalarRepr::Complex { re, im } => Some(Complex::new(*re, *im)),
            ScalarRepr::Exact(s) => parse_rational(s).map(|r| r.to_complex()),
        }
    }
}

/// Serialized form of a scalar: exact values as `p/q` strings, floating
/// values as `{re, im}` objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Exact(String),
    Complex { re: f64, im: f64 },
}

impl fmt::Display for ScalarRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarRepr::Exact(s) => f.write_str(s),
            ScalarRepr::Complex { re, im } => write!(f, "{}", format_complex(Complex::new(*re, *im))),
        }
    }
}

/// Serde adapter writing a [`Complex`] as `{"re": …, "im": …}`.
pub mod complex_obj {
    use super::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Obj {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(c: &Complex, s: S) -> Result<S::Ok, S::Error> {
        Obj {
            re: c.re + 0.0,
            im: c.im + 0.0,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex, D::Error> {
        let o = Obj::deserialize(d)?;
        Ok(Complex::new(o.re, o.im))
    }
}

/// Same as [`complex_obj`] for lists.
pub mod complex_vec {
    use super::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Obj {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
        let objs: Vec<Obj> = v
            .iter()
            .map(|c| Obj {
                re: c.re + 0.0,
                im: c.im + 0.0,
            })
            .collect();
        objs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
        let objs = Vec::<Obj>::deserialize(d)?;
        Ok(objs.into_iter().map(|o| Complex::new(o.re, o.im)).collect())
    }
}

/// `re+imi` notation used in CSV and table output.
pub fn format_complex(c: Complex) -> String {
    let c = Complex::new(c.re + 0.0, c.im + 0.0);
    if c.im == 0.0 {
        format!("{:e}", c.re)
    } else if c.im.is_sign_negative() {
        format!("{:e}-{:e}i", c.re, -c.im)
    } else {
        format!("{:e}+{:e}i", c.re, c.im)
    }
}

/// Parses `p/q`, integer, or decimal literals (`-1.25`, `3e-2`) into an exact
/// rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Some(if neg { -value } else { value })
}

/// Converts a rational approximation of `x` with denominator at most
/// `max_den` (continued fractions).
pub fn rationalize(x: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(Rational::new(BigInt::from(h1), BigInt::from(k1)))
}
