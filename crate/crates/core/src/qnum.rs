//! Exact reals of the form `u + v·α`.
//!
//! `u` is an arbitrary-precision rational and `v` an integer; `α` is a fixed
//! irrational constant shared by every number in a computation. Because `α`
//! is irrational the representation is unique, so equality is structural and
//! ordering reduces to the sign of `u + v·α`, which is decided exactly for the
//! symbolic constants (square roots, golden ratio) and by interval enclosure
//! for long decimal expansions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::parse;

/// Minimum number of significant digits accepted for a decimal constant.
pub const MIN_DECIMAL_DIGITS: usize = 100;

/// Digits used for the rational stand-in of symbolic constants when a float
/// conversion suffers cancellation.
const HP_DIGITS: u32 = 60;

/// An element of ℚ + ℤα.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QNum {
    u: BigRational,
    v: BigInt,
}

impl QNum {
    pub fn new(u: BigRational, v: BigInt) -> Self {
        QNum { u, v }
    }

    pub fn zero() -> Self {
        QNum { u: BigRational::zero(), v: BigInt::zero() }
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        QNum { u: BigRational::from_integer(n.into()), v: BigInt::zero() }
    }

    pub fn rational(u: BigRational) -> Self {
        QNum { u, v: BigInt::zero() }
    }

    /// `v·α`.
    pub fn alpha_multiple(v: impl Into<BigInt>) -> Self {
        QNum { u: BigRational::zero(), v: v.into() }
    }

    pub fn u(&self) -> &BigRational {
        &self.u
    }

    pub fn v(&self) -> &BigInt {
        &self.v
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.v.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.v.is_zero().then_some(&self.u)
    }

    pub fn scale_int(&self, k: &BigInt) -> QNum {
        QNum { u: &self.u * BigRational::from_integer(k.clone()), v: &self.v * k }
    }

    /// Multiplication by a rational; `None` when the α-coefficient would
    /// leave ℤ.
    pub fn scale_rational(&self, q: &BigRational) -> Option<QNum> {
        let v = BigRational::from_integer(self.v.clone()) * q;
        v.is_integer().then(|| QNum { u: &self.u * q, v: v.to_integer() })
    }

    pub fn add_int(&self, k: &BigInt) -> QNum {
        QNum { u: &self.u + BigRational::from_integer(k.clone()), v: self.v.clone() }
    }

    /// Formal product `(u₁ + v₁α)(u₂ + v₂α)` in ℚ[α] of degree two.
    pub fn mul_formal(&self, other: &QNum) -> AlphaPoly {
        let v1 = BigRational::from_integer(self.v.clone());
        let v2 = BigRational::from_integer(other.v.clone());
        AlphaPoly { c0: &self.u * &other.u, c1: &self.u * &v2 + &v1 * &other.u, c2: v1 * v2 }
    }
}

impl Add for &QNum {
    type Output = QNum;
    fn add(self, rhs: &QNum) -> QNum {
        QNum { u: &self.u + &rhs.u, v: &self.v + &rhs.v }
    }
}

impl Sub for &QNum {
    type Output = QNum;
    fn sub(self, rhs: &QNum) -> QNum {
        QNum { u: &self.u - &rhs.u, v: &self.v - &rhs.v }
    }
}

impl Add for QNum {
    type Output = QNum;
    fn add(self, rhs: QNum) -> QNum {
        QNum { u: self.u + rhs.u, v: self.v + rhs.v }
    }
}

impl Sub for QNum {
    type Output = QNum;
    fn sub(self, rhs: QNum) -> QNum {
        QNum { u: self.u - rhs.u, v: self.v - rhs.v }
    }
}

impl Neg for QNum {
    type Output = QNum;
    fn neg(self) -> QNum {
        QNum { u: -self.u, v: -self.v }
    }
}

impl Neg for &QNum {
    type Output = QNum;
    fn neg(self) -> QNum {
        QNum { u: -&self.u, v: -&self.v }
    }
}

impl fmt::Display for QNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.u.is_zero(), self.v.is_zero()) {
            (_, true) => write!(f, "{}", self.u),
            (true, false) => write!(f, "{}α", self.v),
            (false, false) if self.v.is_negative() => write!(f, "{} - {}α", self.u, -&self.v),
            (false, false) => write!(f, "{} + {}α", self.u, self.v),
        }
    }
}

/// `c0 + c1·α + c2·α²` with rational coefficients, used for inner products
/// of lattice vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaPoly {
    pub c0: BigRational,
    pub c1: BigRational,
    pub c2: BigRational,
}

impl AlphaPoly {
    pub fn zero() -> Self {
        AlphaPoly { c0: BigRational::zero(), c1: BigRational::zero(), c2: BigRational::zero() }
    }

    /// True when the polynomial is identically an integer, independent of α.
    pub fn formal_integer(&self) -> Option<BigInt> {
        (self.c1.is_zero() && self.c2.is_zero() && self.c0.is_integer()).then(|| self.c0.to_integer())
    }

    pub fn formal_rational(&self) -> Option<&BigRational> {
        (self.c1.is_zero() && self.c2.is_zero()).then_some(&self.c0)
    }

    /// Rewrites `α²` through the constant's minimal relation when one is
    /// known and returns the result as a [`QNum`].
    pub fn reduce(&self, alpha: &Alpha) -> Option<QNum> {
        let (mut c0, mut c1) = (self.c0.clone(), self.c1.clone());
        if !self.c2.is_zero() {
            let (r0, r1) = alpha.square_relation()?;
            c0 += &self.c2 * r0;
            c1 += &self.c2 * r1;
        }
        c1.is_integer().then(|| QNum { u: c0, v: c1.to_integer() })
    }
}

impl Add for AlphaPoly {
    type Output = AlphaPoly;
    fn add(self, rhs: AlphaPoly) -> AlphaPoly {
        AlphaPoly { c0: self.c0 + rhs.c0, c1: self.c1 + rhs.c1, c2: self.c2 + rhs.c2 }
    }
}

impl Sub for AlphaPoly {
    type Output = AlphaPoly;
    fn sub(self, rhs: AlphaPoly) -> AlphaPoly {
        AlphaPoly { c0: self.c0 - rhs.c0, c1: self.c1 - rhs.c1, c2: self.c2 - rhs.c2 }
    }
}

/// A decimal expansion `value` with `digits` significant digits whose last
/// digit sits at `10^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    value: BigRational,
    digits: usize,
    exp: i64,
    text: String,
}

impl Decimal {
    pub fn parse(text: &str) -> Result<Decimal> {
        let (value, digits, exp) = parse::decimal_digits(text)?;
        Ok(Decimal { value, digits, exp, text: text.trim().to_string() })
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn digits(&self) -> usize {
        self.digits
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Half a unit in the last place: the input's own uncertainty.
    fn half_ulp(&self) -> BigRational {
        pow10(self.exp) / BigRational::from_integer(2.into())
    }

    /// Truncation of the value to `p` significant digits together with the
    /// truncation error bound.
    fn truncated(&self, p: usize) -> (BigRational, BigRational) {
        if p >= self.digits {
            return (self.value.clone(), BigRational::zero());
        }
        let unit = pow10(self.exp + (self.digits - p) as i64);
        let t = (&self.value / &unit).trunc() * &unit;
        (t, unit)
    }
}

fn pow10(e: i64) -> BigRational {
    let p = BigInt::from(10u32).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// The irrational part of the session constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Base {
    /// `√r` for a positive rational `r` that is not a rational square.
    Sqrt(BigRational),
    /// `(1 + √5) / 2`.
    Golden,
    Decimal(Decimal),
}

#[derive(Debug)]
struct AlphaInner {
    scale: BigRational,
    base: Base,
    approx: f64,
    hp: BigRational,
}

/// The session constant `α = scale · base`.
#[derive(Clone, Debug)]
pub struct Alpha(Arc<AlphaInner>);

impl PartialEq for Alpha {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.scale == other.0.scale && self.0.base == other.0.base)
    }
}

impl Eq for Alpha {}

impl Alpha {
    /// `√r`. Fails when `r` is not positive or is the square of a rational.
    pub fn sqrt(r: BigRational) -> Result<Alpha> {
        if !r.is_positive() {
            return Err(Error::InvalidInput(format!("sqrt constant needs a positive radicand, got {r}")));
        }
        if rational_sqrt(&r).is_some() {
            return Err(Error::InvalidInput(format!("sqrt({r}) is rational")));
        }
        Ok(Self::build(BigRational::one(), Base::Sqrt(r)))
    }

    pub fn sqrt_int(r: i64) -> Result<Alpha> {
        Self::sqrt(BigRational::from_integer(r.into()))
    }

    pub fn golden() -> Alpha {
        Self::build(BigRational::one(), Base::Golden)
    }

    /// A decimal expansion with at least [`MIN_DECIMAL_DIGITS`] significant
    /// digits.
    pub fn decimal(text: &str) -> Result<Alpha> {
        let d = Decimal::parse(text)?;
        if d.digits < MIN_DECIMAL_DIGITS {
            return Err(Error::InvalidInput(format!(
                "decimal constant has {} significant digits, at least {MIN_DECIMAL_DIGITS} required",
                d.digits
            )));
        }
        Ok(Self::build(BigRational::one(), Base::Decimal(d)))
    }

    /// `q · self`, canonicalised so that square roots carry scale ±1.
    pub fn scaled(&self, q: &BigRational) -> Result<Alpha> {
        if q.is_zero() {
            return Err(Error::InvalidInput("zero multiple of an irrational constant".into()));
        }
        let scale = &self.0.scale * q;
        Ok(Self::build(scale, self.0.base.clone()))
    }

    fn build(scale: BigRational, base: Base) -> Alpha {
        let (scale, base) = match base {
            Base::Sqrt(r) => {
                let s2 = &scale * &scale;
                let sign = if scale.is_negative() { -BigRational::one() } else { BigRational::one() };
                (sign, Base::Sqrt(r * s2))
            }
            other => (scale, other),
        };
        let base_hp = match &base {
            Base::Sqrt(r) => sqrt_hp(r),
            Base::Golden => {
                (BigRational::one() + sqrt_hp(&BigRational::from_integer(5.into())))
                    / BigRational::from_integer(2.into())
            }
            Base::Decimal(d) => d.value.clone(),
        };
        let hp = &scale * base_hp;
        let approx = hp.to_f64().unwrap_or(f64::NAN);
        Alpha(Arc::new(AlphaInner { scale, base, approx, hp }))
    }

    pub fn base(&self) -> &Base {
        &self.0.base
    }

    pub fn scale(&self) -> &BigRational {
        &self.0.scale
    }

    pub fn approx(&self) -> f64 {
        self.0.approx
    }

    /// A rational approximation accurate to far beyond f64 precision.
    pub fn high_precision(&self) -> &BigRational {
        &self.0.hp
    }

    /// `α² = r0 + r1·α` when the constant satisfies a known quadratic.
    pub fn square_relation(&self) -> Option<(BigRational, BigRational)> {
        let s = &self.0.scale;
        match &self.0.base {
            Base::Sqrt(r) => Some((s * s * r, BigRational::zero())),
            // (sφ)² = s²φ + s² = s·(sφ) + s²
            Base::Golden => Some((s * s, s.clone())),
            Base::Decimal(_) => None,
        }
    }

    /// `1 / q` when it stays in `ℚ + ℤα`. Needs a known quadratic relation
    /// for irrational `q`.
    pub fn reciprocal(&self, q: &QNum) -> Option<QNum> {
        if q.is_zero() {
            return None;
        }
        if q.v.is_zero() {
            return Some(QNum::rational(q.u.recip()));
        }
        let (r0, r1) = self.square_relation()?;
        let v = BigRational::from_integer(q.v.clone());
        let t = &q.u + &r1 * &v;
        let d = &q.u * &t - &r0 * &v * &v;
        let w = -(&v / &d);
        w.is_integer().then(|| QNum { u: t / &d, v: w.to_integer() })
    }

    /// Working precision bound used for decimal constants.
    pub fn precision_digits(&self) -> Option<usize> {
        match &self.0.base {
            Base::Decimal(d) => Some(d.digits),
            _ => None,
        }
    }

    /// Sign of `u + v·α`.
    pub fn sign(&self, q: &QNum) -> Result<Ordering> {
        if q.v.is_zero() {
            return Ok(q.u.cmp(&BigRational::zero()));
        }
        if let Some(s) = self.sign_fast(q) {
            return Ok(s);
        }
        let w = BigRational::from_integer(q.v.clone()) * &self.0.scale;
        match &self.0.base {
            Base::Sqrt(r) => Ok(sign_sqrt(&q.u, &w, r)),
            Base::Golden => {
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                let w2 = &w * &half;
                Ok(sign_sqrt(&(&q.u + &w2), &w2, &BigRational::from_integer(5.into())))
            }
            Base::Decimal(d) => sign_decimal(&q.u, &w, d),
        }
    }

    fn sign_fast(&self, q: &QNum) -> Option<Ordering> {
        let uf = q.u.to_f64()?;
        let vf = q.v.to_f64()?;
        let t = vf * self.0.approx;
        let s = uf + t;
        if !s.is_finite() || !t.is_finite() {
            return None;
        }
        let bound = (uf.abs() + t.abs()) * 1e-13 + f64::MIN_POSITIVE;
        if s > bound {
            Some(Ordering::Greater)
        } else if s < -bound {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn cmp(&self, a: &QNum, b: &QNum) -> Result<Ordering> {
        if a == b {
            return Ok(Ordering::Equal);
        }
        self.sign(&(a - b))
    }

    pub fn lt(&self, a: &QNum, b: &QNum) -> Result<bool> {
        Ok(self.cmp(a, b)? == Ordering::Less)
    }

    pub fn le(&self, a: &QNum, b: &QNum) -> Result<bool> {
        Ok(self.cmp(a, b)? != Ordering::Greater)
    }

    /// Nearest f64 to `u + v·α`; falls back to a high-precision rational
    /// evaluation when the two parts cancel.
    pub fn to_f64(&self, q: &QNum) -> f64 {
        let uf = q.u.to_f64().unwrap_or(f64::NAN);
        if q.v.is_zero() {
            return uf;
        }
        let t = q.v.to_f64().unwrap_or(f64::NAN) * self.0.approx;
        let s = uf + t;
        if s.is_finite() && s.abs() > 1e-6 * (uf.abs() + t.abs()) {
            return s;
        }
        (&q.u + BigRational::from_integer(q.v.clone()) * &self.0.hp).to_f64().unwrap_or(f64::NAN)
    }

    /// `⌊u + v·α⌋`, exact.
    pub fn floor(&self, q: &QNum) -> Result<BigInt> {
        if q.v.is_zero() {
            return Ok(q.u.floor().to_integer());
        }
        let approx = self.to_f64(q);
        let mut z = if approx.is_finite() && approx.abs() < 1e15 {
            BigInt::from_f64(approx.floor()).unwrap_or_default()
        } else {
            (&q.u + BigRational::from_integer(q.v.clone()) * &self.0.hp).floor().to_integer()
        };
        loop {
            if self.lt(q, &QNum::int(z.clone()))? {
                z -= 1;
            } else if !self.lt(q, &QNum::int(&z + 1))? {
                z += 1;
            } else {
                return Ok(z);
            }
        }
    }

    pub fn ceil(&self, q: &QNum) -> Result<BigInt> {
        Ok(-self.floor(&-q)?)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match &self.0.base {
            Base::Sqrt(r) => format!("sqrt({r})"),
            Base::Golden => "golden".to_string(),
            Base::Decimal(d) => format!("decimal[{} digits]", d.digits),
        };
        if self.0.scale.is_one() {
            write!(f, "{base}")
        } else {
            write!(f, "{}*{base}", self.0.scale)
        }
    }
}

/// Exact sign of `u + w·√r` for a non-square `r > 0`.
fn sign_sqrt(u: &BigRational, w: &BigRational, r: &BigRational) -> Ordering {
    let su = u.cmp(&BigRational::zero());
    let sw = w.cmp(&BigRational::zero());
    if sw == Ordering::Equal {
        return su;
    }
    if su == Ordering::Equal || su == sw {
        return sw;
    }
    match (u * u).cmp(&(w * w * r)) {
        Ordering::Greater => su,
        Ordering::Less => sw,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Sign of `u + w·d` where `d` is known only to within half an ulp.
/// Working precision doubles from 32 digits up to the input's own digits.
fn sign_decimal(u: &BigRational, w: &BigRational, d: &Decimal) -> Result<Ordering> {
    let input_err = d.half_ulp();
    let mut p = 32usize;
    loop {
        let (mid, trunc_err) = d.truncated(p);
        let radius = (trunc_err + &input_err) * w.abs();
        let centre = u + w * mid;
        if centre > radius {
            return Ok(Ordering::Greater);
        }
        if -&centre > radius {
            return Ok(Ordering::Less);
        }
        if p >= d.digits {
            return Err(Error::InsufficientPrecision { digits: d.digits });
        }
        p = (p * 2).min(d.digits);
    }
}

/// `√q` when `q` is the square of a rational.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

fn sqrt_hp(r: &BigRational) -> BigRational {
    let scale = BigInt::from(10u32).pow(HP_DIGITS);
    let radicand = r.numer() * r.denom() * &scale * &scale;
    let root = if radicand.sign() == Sign::Minus { BigInt::zero() } else { radicand.sqrt() };
    BigRational::new(root, r.denom() * scale)
}

/// `⌊p/q⌋` for integers.
pub fn div_floor(p: &BigInt, q: &BigInt) -> BigInt {
    p.div_floor(q)
}
