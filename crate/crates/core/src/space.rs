//! Finite-support elements of the quotient space `𝒳_ω` (degrees ≥ 3).
//!
//! A [`CoeffVec`] is generic over its scalar kind: exact complex rationals
//! ([`QComplex`]) or `f64` complexes ([`C64`]). Degrees below 3 cannot be
//! stored and zero coefficients are never kept.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::num::{
    biguint_json, format_rational, parse_rational, qcomplex_to_c64, rational_to_f64, Cplx, PiScaled, QComplex, Real, C64,
};
use crate::weights::WeightDescriptor;

/// A degree `n >= 3`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Degree(BigUint);

impl Degree {
    pub fn new(n: BigUint) -> Result<Self> {
        Self::try_new(n).ok_or_else(|| Error::InvalidInput("degrees below 3 are quotiented out".into()))
    }

    /// `None` for degrees killed by the quotient.
    pub fn try_new(n: BigUint) -> Option<Self> {
        (n >= BigUint::from(3u32)).then_some(Degree(n))
    }

    pub fn from_u64(n: u64) -> Result<Self> {
        Self::new(BigUint::from(n))
    }

    pub fn get(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    Rational,
    Float,
}

impl ScalarKind {
    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::Rational => "rational",
            ScalarKind::Float => "float",
        }
    }
}

pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    const KIND: ScalarKind;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn to_cplx(&self) -> Cplx;
    fn to_c64(&self) -> C64;
    /// Multiplication by a real factor; exact scalars refuse inexact factors.
    fn scale_real(&self, r: &Real) -> Result<Self>;
    /// Lossy only from rational to float, never the other way.
    fn from_qcomplex(z: &QComplex) -> Self;
    fn json_parts(&self) -> (Value, Value);
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self>;
}

impl Scalar for QComplex {
    const KIND: ScalarKind = ScalarKind::Rational;
    fn zero() -> Self {
        QComplex::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn conj(&self) -> Self {
        QComplex::conj(self)
    }
    fn to_cplx(&self) -> Cplx {
        Cplx::Exact(self.clone())
    }
    fn to_c64(&self) -> C64 {
        qcomplex_to_c64(self)
    }
    fn scale_real(&self, r: &Real) -> Result<Self> {
        match r {
            Real::Exact(q) => Ok(self.scale(q.clone())),
            Real::Approx(_) => Err(Error::Inexact(format!("factor {r}"))),
        }
    }
    fn from_qcomplex(z: &QComplex) -> Self {
        z.clone()
    }
    fn json_parts(&self) -> (Value, Value) {
        (json!(format_rational(&self.re)), json!(format_rational(&self.im)))
    }
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        let part = |v: &Value| match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            other => Err(Error::Parse(format!("expected rational, got {other}"))),
        };
        Ok(QComplex::new(part(re)?, part(im)?))
    }
}

impl Scalar for C64 {
    const KIND: ScalarKind = ScalarKind::Float;
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        C64::conj(self)
    }
    fn to_cplx(&self) -> Cplx {
        Cplx::Approx(*self)
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn scale_real(&self, r: &Real) -> Result<Self> {
        Ok(self * r.to_f64())
    }
    fn from_qcomplex(z: &QComplex) -> Self {
        qcomplex_to_c64(z)
    }
    fn json_parts(&self) -> (Value, Value) {
        (json!(self.re), json!(self.im))
    }
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        let part = |v: &Value| match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad float {n}"))),
            Value::String(s) => parse_rational(s).map(|q| rational_to_f64(&q)),
            other => Err(Error::Parse(format!("expected float, got {other}"))),
        };
        Ok(C64::new(part(re)?, part(im)?))
    }
}

/// Sparse vector `Σ c_n z^n` over degrees `n >= 3`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffVec<S: Scalar> {
    entries: BTreeMap<BigUint, S>,
}

impl<S: Scalar> Default for CoeffVec<S> {
    fn default() -> Self {
        CoeffVec {
            entries: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> CoeffVec<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn monomial(d: u64, c: S) -> Result<Self> {
        let mut v = Self::new();
        v.accumulate(Degree::from_u64(d)?, c);
        Ok(v)
    }

    pub fn from_terms<I: IntoIterator<Item = (u64, S)>>(terms: I) -> Result<Self> {
        let mut v = Self::new();
        for (d, c) in terms {
            v.accumulate(Degree::from_u64(d)?, c);
        }
        Ok(v)
    }

    pub fn from_big_terms<I: IntoIterator<Item = (BigUint, S)>>(terms: I) -> Result<Self> {
        let mut v = Self::new();
        for (d, c) in terms {
            v.accumulate(Degree::new(d)?, c);
        }
        Ok(v)
    }

    /// Adds `c z^d`, dropping the entry if it cancels.
    pub fn accumulate(&mut self, d: Degree, c: S) {
        if c.is_zero() {
            return;
        }
        let key = d.into_inner();
        match self.entries.get_mut(&key) {
            Some(slot) => {
                let sum = slot.add(&c);
                if sum.is_zero() {
                    self.entries.remove(&key);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.entries.insert(key, c);
            }
        }
    }

    pub fn kind(&self) -> ScalarKind {
        S::KIND
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending degree order.
    pub fn iter(&self) -> impl Iterator<Item = (&BigUint, &S)> {
        self.entries.iter()
    }

    pub fn get(&self, d: &BigUint) -> Option<&S> {
        self.entries.get(d)
    }

    pub fn coeff(&self, d: u64) -> S {
        self.entries.get(&BigUint::from(d)).cloned().unwrap_or_else(S::zero)
    }

    pub fn max_degree(&self) -> Option<&BigUint> {
        self.entries.keys().next_back()
    }

    pub fn add(&self, g: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in &g.entries {
            out.accumulate(Degree(d.clone()), c.clone());
        }
        out
    }

    pub fn sub(&self, g: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in &g.entries {
            out.accumulate(Degree(d.clone()), c.neg());
        }
        out
    }

    pub fn scale(&self, lambda: &S) -> Self {
        if lambda.is_zero() {
            return Self::new();
        }
        let mut out = Self::new();
        for (d, c) in &self.entries {
            out.accumulate(Degree(d.clone()), c.mul(lambda));
        }
        out
    }

    /// Entries with degree `<= cap`.
    pub fn restrict(&self, cap: &BigUint) -> Self {
        CoeffVec {
            entries: self
                .entries
                .range(..=cap.clone())
                .map(|(d, c)| (d.clone(), c.clone()))
                .collect(),
        }
    }

    /// Relabels degrees by `f`, which must keep them `>= 3`; collisions add.
    pub fn map_degrees<F: Fn(&BigUint) -> BigUint>(&self, f: F) -> Self {
        let mut out = Self::new();
        for (d, c) in &self.entries {
            if let Some(nd) = Degree::try_new(f(d)) {
                out.accumulate(nd, c.clone());
            }
        }
        out
    }

    /// `‖f‖² = Σ |c_n|²/ω(n)`.
    pub fn norm_sq(&self, w: &WeightDescriptor) -> PiScaled<Real> {
        let coeff = self
            .entries
            .iter()
            .map(|(d, c)| weighted(&c.to_cplx().norm_sqr(), w, d))
            .sum();
        PiScaled {
            coeff,
            pi_pow: -w.pi_pow(),
        }
    }

    /// `⟨f, g⟩ = Σ c_n(f) conj(c_n(g)) / ω(n)`.
    pub fn inner(&self, g: &Self, w: &WeightDescriptor) -> PiScaled<Cplx> {
        let (small, large, swap) = if self.len() <= g.len() {
            (self, g, false)
        } else {
            (g, self, true)
        };
        let mut acc = Cplx::zero();
        let mut exact = true;
        let mut acc_f = C64::new(0.0, 0.0);
        for (d, a) in &small.entries {
            let Some(b) = large.entries.get(d) else { continue };
            let (x, y) = if swap { (b, a) } else { (a, b) };
            let term = x.mul(&y.conj());
            if S::KIND == ScalarKind::Float || !w.is_exact() {
                exact = false;
                acc_f += term.to_c64() * reciprocal_f64(w, d);
            } else {
                acc = acc + term.to_cplx().scale(&w.rational_part(d).recip());
            }
        }
        let coeff = if exact {
            acc
        } else {
            Cplx::Approx(acc_f + acc.to_c64())
        };
        PiScaled {
            coeff,
            pi_pow: -w.pi_pow(),
        }
    }

    /// Largest `|c_n|` over all entries.
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|c| c.to_c64().norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(d, c)| {
                let (re, im) = c.json_parts();
                json!([biguint_json::to_value(d), re, im])
            })
            .collect();
        json!({ "scalar": S::KIND.name(), "entries": entries })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v
            .get("scalar")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("vector needs a \"scalar\" field".into()))?;
        if kind != S::KIND.name() {
            return Err(Error::ScalarKindMismatch {
                left: S::KIND.name(),
                right: if kind == "rational" { "rational" } else { "float" },
            });
        }
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("vector needs an \"entries\" array".into()))?;
        let mut out = Self::new();
        for e in entries {
            let triple = e
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::Parse(format!("entry {e} is not [degree, re, im]")))?;
            let d = biguint_json::from_value(&triple[0]).map_err(Error::Parse)?;
            out.accumulate(Degree::new(d)?, S::from_json_parts(&triple[1], &triple[2])?);
        }
        Ok(out)
    }
}

impl CoeffVec<QComplex> {
    pub fn to_float(&self) -> CoeffVec<C64> {
        let mut out = CoeffVec::new();
        for (d, c) in &self.entries {
            out.accumulate(Degree(d.clone()), qcomplex_to_c64(c));
        }
        out
    }
}

fn weighted(x: &Real, w: &WeightDescriptor, d: &BigUint) -> Real {
    match x {
        Real::Exact(_) if w.is_exact() => x * &w.rational_part(d).recip(),
        _ => Real::Approx(x.to_f64() * reciprocal_f64(w, d)),
    }
}

/// `1/ρ(d)` in floating point, where `ω = π^{pi_pow} ρ`.
pub(crate) fn reciprocal_f64(w: &WeightDescriptor, d: &BigUint) -> f64 {
    match w {
        WeightDescriptor::ClassicBergman => match (d + 1u32).to_f64() {
            Some(x) if x.is_finite() => 1.0 / x,
            _ => (-crate::weights::ln_biguint(&(d + 1u32))).exp(),
        },
        _ => w.rational_part(d).recip().to_f64(),
    }
}

impl<S: Scalar> Serialize for CoeffVec<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for CoeffVec<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Self::from_json(&v).map_err(D::Error::custom)
    }
}

impl<S: Scalar> fmt::Display for CoeffVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        for (i, (d, c)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})z^{d}", c.to_cplx())?;
        }
        Ok(())
    }
}

/// A vector of either scalar kind, as read from JSON.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyVec {
    Rational(CoeffVec<QComplex>),
    Float(CoeffVec<C64>),
}

impl AnyVec {
    pub fn kind(&self) -> ScalarKind {
        match self {
            AnyVec::Rational(_) => ScalarKind::Rational,
            AnyVec::Float(_) => ScalarKind::Float,
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("scalar").and_then(Value::as_str) {
            Some("rational") => CoeffVec::from_json(v).map(AnyVec::Rational),
            Some("float") => CoeffVec::from_json(v).map(AnyVec::Float),
            other => Err(Error::Parse(format!("unknown scalar kind {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyVec::Rational(v) => v.to_json(),
            AnyVec::Float(v) => v.to_json(),
        }
    }

    pub fn to_float(&self) -> CoeffVec<C64> {
        match self {
            AnyVec::Rational(v) => v.to_float(),
            AnyVec::Float(v) => v.clone(),
        }
    }

    pub fn norm_sq(&self, w: &WeightDescriptor) -> PiScaled<Real> {
        match self {
            AnyVec::Rational(v) => v.norm_sq(w),
            AnyVec::Float(v) => v.norm_sq(w),
        }
    }

    /// Inner product; both sides must share a scalar kind.
    pub fn inner(&self, g: &AnyVec, w: &WeightDescriptor) -> Result<PiScaled<Cplx>> {
        match (self, g) {
            (AnyVec::Rational(a), AnyVec::Rational(b)) => Ok(a.inner(b, w)),
            (AnyVec::Float(a), AnyVec::Float(b)) => Ok(a.inner(b, w)),
            _ => Err(Error::ScalarKindMismatch {
                left: self.kind().name(),
                right: g.kind().name(),
            }),
        }
    }
}
