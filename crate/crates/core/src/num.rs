//! Scalar plumbing shared by every module.
//!
//! Values are either exact ([`BigRational`] based) or approximate (`f64` based).
//! Arithmetic between two exact values stays exact; anything touching an
//! approximate value degrades to `f64`. Norms in Bergman-type spaces carry a
//! symbolic power of π, kept apart in [`PiScaled`] so that the rational part
//! remains exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact complex rational.
pub type QComplex = Complex<BigRational>;
/// Double precision complex.
pub type C64 = Complex<f64>;

/// A real number that is exact whenever its inputs were.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Exact(BigRational),
    Approx(f64),
}

impl Real {
    pub fn zero() -> Self {
        Real::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Real::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Real::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(q) => Some(q),
            Real::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(q) => rational_to_f64(q),
            Real::Approx(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Real::Exact(q) => q.is_zero(),
            Real::Approx(x) => *x == 0.0,
        }
    }

    pub fn recip(&self) -> Real {
        match self {
            Real::Exact(q) => Real::Exact(q.recip()),
            Real::Approx(x) => Real::Approx(x.recip()),
        }
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(q) => f.write_str(&format_rational(q)),
            Real::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! real_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                match (self, rhs) {
                    (Real::Exact(a), Real::Exact(b)) => Real::Exact(a $op b),
                    _ => Real::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self) $op (&rhs)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Exact(q) => Real::Exact(-q),
            Real::Approx(x) => Real::Approx(-x),
        }
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Real::Exact(q) => s.serialize_str(&format_rational(q)),
            Real::Approx(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => parse_rational(&s)
                .map(Real::Exact)
                .map_err(D::Error::custom),
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(Real::Approx)
                .ok_or_else(|| D::Error::custom("number out of range")),
            other => Err(D::Error::custom(format!("expected real, got {other}"))),
        }
    }
}

/// A complex number that is exact whenever its inputs were.
#[derive(Clone, Debug, PartialEq)]
pub enum Cplx {
    Exact(QComplex),
    Approx(C64),
}

impl Cplx {
    pub fn zero() -> Self {
        Cplx::Exact(QComplex::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn to_c64(&self) -> C64 {
        match self {
            Cplx::Exact(z) => qcomplex_to_c64(z),
            Cplx::Approx(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Cplx::Exact(z) => z.re.is_zero() && z.im.is_zero(),
            Cplx::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn conj(&self) -> Cplx {
        match self {
            Cplx::Exact(z) => Cplx::Exact(z.conj()),
            Cplx::Approx(z) => Cplx::Approx(z.conj()),
        }
    }

    /// Squared modulus.
    pub fn norm_sqr(&self) -> Real {
        match self {
            Cplx::Exact(z) => Real::Exact(z.norm_sqr()),
            Cplx::Approx(z) => Real::Approx(z.norm_sqr()),
        }
    }

    pub fn re(&self) -> Real {
        match self {
            Cplx::Exact(z) => Real::Exact(z.re.clone()),
            Cplx::Approx(z) => Real::Approx(z.re),
        }
    }

    pub fn scale(&self, r: &Real) -> Cplx {
        match (self, r) {
            (Cplx::Exact(z), Real::Exact(q)) => Cplx::Exact(z.scale(q.clone())),
            _ => Cplx::Approx(self.to_c64() * r.to_f64()),
        }
    }
}

impl Add for Cplx {
    type Output = Cplx;
    fn add(self, rhs: Cplx) -> Cplx {
        match (self, rhs) {
            (Cplx::Exact(a), Cplx::Exact(b)) => Cplx::Exact(a + b),
            (a, b) => Cplx::Approx(a.to_c64() + b.to_c64()),
        }
    }
}

impl Mul for Cplx {
    type Output = Cplx;
    fn mul(self, rhs: Cplx) -> Cplx {
        match (self, rhs) {
            (Cplx::Exact(a), Cplx::Exact(b)) => Cplx::Exact(a * b),
            (a, b) => Cplx::Approx(a.to_c64() * b.to_c64()),
        }
    }
}

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cplx::Exact(z) => s.serialize_str(&format_qcomplex(z)),
            Cplx::Approx(z) => [z.re, z.im].serialize(s),
        }
    }
}

impl fmt::Display for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cplx::Exact(z) => f.write_str(&format_qcomplex(z)),
            Cplx::Approx(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// `coeff · π^pi_pow`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiScaled<T> {
    pub coeff: T,
    pub pi_pow: i32,
}

impl PiScaled<Real> {
    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64() * std::f64::consts::PI.powi(self.pi_pow)
    }
}

impl PiScaled<Cplx> {
    pub fn to_c64(&self) -> C64 {
        self.coeff.to_c64() * std::f64::consts::PI.powi(self.pi_pow)
    }
}

impl<T: fmt::Display> fmt::Display for PiScaled<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_pow {
            0 => write!(f, "{}", self.coeff),
            1 => write!(f, "({})·π", self.coeff),
            p => write!(f, "({})·π^{p}", self.coeff),
        }
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Out of f64 range: fall back on the sign.
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn qcomplex_to_c64(z: &QComplex) -> C64 {
    C64::new(rational_to_f64(&z.re), rational_to_f64(&z.im))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn biguint_to_rational(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

pub fn qc(re: BigRational, im: BigRational) -> QComplex {
    QComplex::new(re, im)
}

/// Exact complex from a real rational.
pub fn qreal(re: BigRational) -> QComplex {
    QComplex::new(re, BigRational::zero())
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p/q"`, `"-7"`, or a plain decimal such as `"0.125"` or `"1e-3"`,
/// always to an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut q = BigRational::from_integer(all) / pow_rational(&ten, frac.len() as i32);
    q *= pow_rational(&ten, exp);
    Ok(if neg { -q } else { q })
}

/// Integer power with negative exponents allowed.
pub fn pow_rational(q: &BigRational, e: i32) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = if e < 0 { q.recip() } else { q.clone() };
    let mut e = e.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

pub fn format_qcomplex(z: &QComplex) -> String {
    if z.im.is_zero() {
        return format_rational(&z.re);
    }
    let im = format_rational(&z.im.abs());
    let sign = if z.im.is_negative() { '-' } else { '+' };
    if z.re.is_zero() {
        format!("{}{}i", if z.im.is_negative() { "-" } else { "" }, im)
    } else {
        format!("{}{sign}{im}i", format_rational(&z.re))
    }
}

/// Parses `"a"`, `"a+bi"`, `"a-b i"`, `"bi"`, `"i"` with rational parts.
pub fn parse_qcomplex(s: &str) -> Result<QComplex> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(qreal(parse_rational(&t)?));
    };
    let split = body
        .char_indices()
        .filter(|&(i, c)| {
            i > 0 && (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
        })
        .map(|(i, _)| i)
        .next_back();
    let (re, im) = match split {
        Some(i) => (parse_rational(&body[..i])?, &body[i..]),
        None => (BigRational::zero(), body),
    };
    let im = match im {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        other => parse_rational(other)?,
    };
    Ok(qc(re, im))
}

/// `e^{iπ·angle}` with the angle reduced exactly mod 2 first, so equal angles
/// modulo 2 give bit-identical results. Multiples of 1/2 are exact.
pub fn cis_pi(angle: &BigRational) -> C64 {
    let two = int(2);
    let reduced = angle - (angle / &two).floor() * &two;
    let doubled = &reduced * &two;
    if doubled.is_integer() {
        return match doubled.to_integer().mod_floor(&BigInt::from(4)).to_u8() {
            Some(0) => C64::new(1.0, 0.0),
            Some(1) => C64::new(0.0, 1.0),
            Some(2) => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let theta = std::f64::consts::PI * rational_to_f64(&reduced);
    C64::new(theta.cos(), theta.sin())
}

/// Serde helpers writing big integers as JSON numbers when they fit in `u64`
/// and as decimal strings otherwise.
pub mod biguint_json {
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        match n.to_u64() {
            Some(v) => s.serialize_u64(v),
            None => s.serialize_str(&n.to_string()),
        }
    }

    pub fn from_value(v: &serde_json::Value) -> Result<BigUint, String> {
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(BigUint::from)
                .ok_or_else(|| format!("not a nonnegative integer: {n}")),
            serde_json::Value::String(s) => s.parse().map_err(|_| format!("not an integer: {s:?}")),
            other => Err(format!("expected integer, got {other}")),
        }
    }

    pub fn to_value(n: &BigUint) -> serde_json::Value {
        match n.to_u64() {
            Some(v) => serde_json::Value::from(v),
            None => serde_json::Value::String(n.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        from_value(&serde_json::Value::deserialize(d)?).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for n in v {
                seq.serialize_element(&to_value(n))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
            Vec::<serde_json::Value>::deserialize(d)?
                .iter()
                .map(from_value)
                .collect::<Result<_, _>>()
                .map_err(D::Error::custom)
        }
    }
}
