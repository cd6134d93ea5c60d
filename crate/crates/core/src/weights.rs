//! Weight families `ω: Z+ → (0, ∞)` as a closed descriptor algebra.
//!
//! Every family factors as `ω(n) = κ · ρ(n)` where `κ` is a symbolic power of
//! π (only the classic Bergman weight `(n+1)/π` uses one) and `ρ(n)` is exact
//! whenever the parameters allow. Ratios `ω(a)/ω(b)` therefore never see π.
//!
//! Hypothesis predicates (bounded below, dyadic divergence, dyadic
//! summability) and the eigenvector membership test are decided per family
//! from the dyadic growth exponent: `ω(k 2^n) ≍ 2^{nα}`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{biguint_to_rational, format_rational, int, parse_rational, pow_rational, PiScaled, Real};

#[derive(Clone, Debug, PartialEq)]
pub enum WeightDescriptor {
    /// `ω₀(n) = (n+1)/π`.
    ClassicBergman,
    /// `c (n+1)^α`.
    PowerLaw { c: BigRational, alpha: BigRational },
    Constant { c: BigRational },
    /// Explicit values for `n < table.len()`, then `c (n+1)^α`.
    Tabulated {
        table: Vec<BigRational>,
        tail_c: BigRational,
        tail_alpha: BigRational,
    },
}

fn require_positive(name: &str, q: &BigRational) -> Result<()> {
    if q.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {}", format_rational(q))))
    }
}

/// Natural log of a big integer without overflowing `f64`.
pub(crate) fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `2^α`, exact for integer `α`.
pub fn pow2(alpha: &BigRational) -> Real {
    if alpha.is_integer() {
        match alpha.to_integer().to_i32() {
            Some(e) => Real::Exact(pow_rational(&int(2), e)),
            None => Real::Approx(2f64.powf(crate::num::rational_to_f64(alpha))),
        }
    } else {
        Real::Approx(2f64.powf(crate::num::rational_to_f64(alpha)))
    }
}

/// Compares a nonnegative real `q` with `2^α`, exactly when `q` is exact.
pub fn cmp_pow2(q: &Real, alpha: &BigRational) -> Ordering {
    match q {
        Real::Exact(q) => {
            // q^s vs 2^p with α = p/s, s > 0.
            let s = alpha.denom().to_u32().expect("denominator fits u32");
            let p = alpha.numer().to_i32().expect("numerator fits i32");
            let lhs = pow_rational(q, s as i32);
            lhs.cmp(&pow_rational(&int(2), p))
        }
        Real::Approx(x) => x
            .partial_cmp(&2f64.powf(crate::num::rational_to_f64(alpha)))
            .unwrap_or(Ordering::Greater),
    }
}

impl WeightDescriptor {
    pub fn classic() -> Self {
        WeightDescriptor::ClassicBergman
    }

    pub fn power_law(c: BigRational, alpha: BigRational) -> Result<Self> {
        require_positive("c", &c)?;
        Ok(WeightDescriptor::PowerLaw { c, alpha })
    }

    pub fn constant(c: BigRational) -> Result<Self> {
        require_positive("c", &c)?;
        Ok(WeightDescriptor::Constant { c })
    }

    pub fn tabulated(table: Vec<BigRational>, tail_c: BigRational, tail_alpha: BigRational) -> Result<Self> {
        for (i, v) in table.iter().enumerate() {
            require_positive(&format!("table[{i}]"), v)?;
        }
        require_positive("tail c", &tail_c)?;
        Ok(WeightDescriptor::Tabulated {
            table,
            tail_c,
            tail_alpha,
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            WeightDescriptor::ClassicBergman => "classic_bergman",
            WeightDescriptor::PowerLaw { .. } => "power_law",
            WeightDescriptor::Constant { .. } => "constant",
            WeightDescriptor::Tabulated { .. } => "tabulated",
        }
    }

    /// Power of π in the symbolic factor `κ`.
    pub fn pi_pow(&self) -> i32 {
        match self {
            WeightDescriptor::ClassicBergman => -1,
            _ => 0,
        }
    }

    /// Whether `ρ(n)` is a rational for every `n`.
    pub fn is_exact(&self) -> bool {
        match self {
            WeightDescriptor::ClassicBergman | WeightDescriptor::Constant { .. } => true,
            WeightDescriptor::PowerLaw { alpha, .. } => alpha.is_integer(),
            WeightDescriptor::Tabulated { tail_alpha, .. } => tail_alpha.is_integer(),
        }
    }

    /// `α` with `ω(k 2^n) ≍ 2^{nα}`.
    pub fn dyadic_growth_exponent(&self) -> BigRational {
        match self {
            WeightDescriptor::ClassicBergman => BigRational::one(),
            WeightDescriptor::PowerLaw { alpha, .. } => alpha.clone(),
            WeightDescriptor::Constant { .. } => BigRational::zero(),
            WeightDescriptor::Tabulated { tail_alpha, .. } => tail_alpha.clone(),
        }
    }

    /// The rational part `ρ(n)` of `ω(n) = π^{pi_pow} ρ(n)`.
    pub fn rational_part(&self, n: &BigUint) -> Real {
        match self {
            WeightDescriptor::ClassicBergman => Real::Exact(biguint_to_rational(&(n + 1u32))),
            WeightDescriptor::Constant { c } => Real::Exact(c.clone()),
            WeightDescriptor::PowerLaw { c, alpha } => power_value(c, alpha, n),
            WeightDescriptor::Tabulated {
                table,
                tail_c,
                tail_alpha,
            } => match n.to_usize().filter(|&i| i < table.len()) {
                Some(i) => Real::Exact(table[i].clone()),
                None => power_value(tail_c, tail_alpha, n),
            },
        }
    }

    /// `ω(n)`.
    pub fn eval(&self, n: &BigUint) -> PiScaled<Real> {
        PiScaled {
            coeff: self.rational_part(n),
            pi_pow: self.pi_pow(),
        }
    }

    /// `1/ω(n)`.
    pub fn reciprocal(&self, n: &BigUint) -> PiScaled<Real> {
        PiScaled {
            coeff: self.rational_part(n).recip(),
            pi_pow: -self.pi_pow(),
        }
    }

    /// `ω(a)/ω(b)`; π cancels.
    pub fn ratio(&self, a: &BigUint, b: &BigUint) -> Real {
        match self {
            WeightDescriptor::PowerLaw { alpha, .. } if !alpha.is_integer() => {
                power_ratio(alpha, a, b)
            }
            _ => self.rational_part(a) / self.rational_part(b),
        }
    }

    /// `Σ_j ω(j)/ω(k)` over the given `js`, with one division.
    pub fn ratio_sum(&self, js: &[BigUint], k: &BigUint) -> Real {
        match self {
            WeightDescriptor::ClassicBergman => {
                let num: BigUint = js.iter().map(|j| j + 1u32).sum();
                Real::Exact(BigRational::new(BigInt::from(num), BigInt::from(k + 1u32)))
            }
            WeightDescriptor::Constant { .. } => Real::from_int(js.len() as i64),
            WeightDescriptor::PowerLaw { alpha, .. } if !alpha.is_integer() => {
                js.iter().map(|j| power_ratio(alpha, j, k)).sum()
            }
            _ => {
                let num: Real = js.iter().map(|j| self.rational_part(j)).sum();
                num / self.rational_part(k)
            }
        }
    }

    pub fn predicates(&self) -> WeightPredicates {
        let alpha = self.dyadic_growth_exponent();
        let growing = alpha.is_positive();
        let bounded_below = !alpha.is_negative();
        WeightPredicates {
            bounded_below,
            dyadic_divergent: growing,
            dyadic_summable: growing,
        }
    }

    /// Refuses weights that are not bounded below.
    pub fn require_bounded_below(&self) -> Result<()> {
        if self.predicates().bounded_below {
            Ok(())
        } else {
            Err(Error::Predicate {
                predicate: "bounded_below",
                detail: format!("{self} tends to 0"),
            })
        }
    }

    /// Whether `(ρ^n / ω(k 2^n))_n` is bounded for every `k >= 3`.
    pub fn dyadic_dominates(&self, rho: &BigRational) -> bool {
        cmp_pow2(&Real::Exact(rho.clone()), &self.dyadic_growth_exponent()) != Ordering::Greater
    }

    /// Whether `Σ_n q^n / ω(k 2^n)` converges for every `k >= 3`, where `q`
    /// is a squared modulus. Ratio test against the dyadic growth: converges
    /// iff `q < 2^α`; at equality the terms tend to a nonzero constant.
    pub fn dyadic_series_converges(&self, q: &Real) -> bool {
        cmp_pow2(q, &self.dyadic_growth_exponent()) == Ordering::Less
    }

    /// A pair `(C, α)` with `1/ω(k 2^n) <= C · 2^{-nα}` for all `n >= 0`.
    pub fn dyadic_reciprocal_bound(&self, k: &BigUint) -> (f64, f64) {
        let kf = ln_biguint(k).exp();
        let inflate = 1.0 + 1e-12;
        match self {
            WeightDescriptor::ClassicBergman => (std::f64::consts::PI / kf * inflate, 1.0),
            WeightDescriptor::Constant { c } => (1.0 / crate::num::rational_to_f64(c) * inflate, 0.0),
            WeightDescriptor::PowerLaw { c, alpha } => (power_bound(c, alpha, kf), crate::num::rational_to_f64(alpha)),
            WeightDescriptor::Tabulated {
                table,
                tail_c,
                tail_alpha,
            } => {
                let a = crate::num::rational_to_f64(tail_alpha);
                let mut c = power_bound(tail_c, tail_alpha, kf);
                let mut x = k.clone();
                let mut n = 0i32;
                while let Some(i) = x.to_usize().filter(|&i| i < table.len()) {
                    let v = crate::num::rational_to_f64(&table[i]);
                    c = c.max(2f64.powf(n as f64 * a) / v * inflate);
                    x <<= 1u32;
                    n += 1;
                }
                (c, a)
            }
        }
    }

    /// Suprema of the three ratio sequences whose maximum is `‖𝒯‖²`:
    /// `ω(6m)/ω(3m)`, `ω(6m+2)/ω(3m+1)` and `(ω(6m+4)+ω(2m+1))/ω(3m+2)`.
    pub fn boundedness_check(&self, m_max: u64) -> BoundednessReport {
        let analytic = self.analytic_suprema();
        let mut sequences = Vec::with_capacity(3);
        for (idx, label) in SEQUENCE_LABELS.iter().enumerate() {
            let mut best = (Real::Approx(f64::NEG_INFINITY), 0u64);
            for m in 1..=m_max {
                let v = self.sequence_term(idx, m);
                if v > best.0 {
                    best = (v, m);
                }
            }
            sequences.push(SequenceSup {
                label: label.to_string(),
                empirical: best.0,
                empirical_argmax: best.1,
                analytic: analytic.as_ref().map(|a| a[idx].clone()),
            });
        }
        let norm_sq = analytic.as_ref().map(|a| {
            a.iter()
                .map(|s| s.value.clone())
                .fold(Real::zero(), Real::max)
        });
        BoundednessReport {
            bounded: analytic.is_some(),
            sequences,
            norm_sq,
        }
    }

    /// The `idx`-th ratio sequence at `m`.
    pub fn sequence_term(&self, idx: usize, m: u64) -> Real {
        let n = |a: u64, b: u64| BigUint::from(a * m + b);
        match idx {
            0 => self.ratio(&n(6, 0), &n(3, 0)),
            1 => self.ratio(&n(6, 2), &n(3, 1)),
            _ => self.ratio_sum(&[n(6, 4), n(2, 1)], &n(3, 2)),
        }
    }

    fn analytic_suprema(&self) -> Option<[AnalyticSup; 3]> {
        match self {
            WeightDescriptor::ClassicBergman => Some([
                affine_ratio_sup(6, 1, 3, 1),
                affine_ratio_sup(6, 3, 3, 2),
                affine_ratio_sup(8, 7, 3, 3),
            ]),
            WeightDescriptor::Constant { .. } => Some(self.at_index(1)),
            WeightDescriptor::PowerLaw { alpha, .. } => Some(self.power_suprema(alpha, 1)),
            WeightDescriptor::Tabulated {
                table, tail_alpha, ..
            } => {
                // From m0 on, every index 2m+1, ..., 6m+4 lies in the tail.
                let n0 = table.len() as u64;
                let m0 = (n0.saturating_sub(1)).div_ceil(2).max(1);
                let mut sups = self.power_suprema(tail_alpha, m0);
                for m in 1..m0 {
                    for (idx, sup) in sups.iter_mut().enumerate() {
                        let v = self.sequence_term(idx, m);
                        if v > sup.value {
                            *sup = AnalyticSup {
                                value: v,
                                attained: Attainment::AtIndex(m),
                            };
                        }
                    }
                }
                Some(sups)
            }
        }
    }

    fn at_index(&self, m: u64) -> [AnalyticSup; 3] {
        [0, 1, 2].map(|idx| AnalyticSup {
            value: self.sequence_term(idx, m),
            attained: Attainment::AtIndex(m),
        })
    }

    /// Suprema over `m >= m0` of the power-law ratio sequences. The bases
    /// `(6m+1)/(3m+1)`, `(6m+3)/(3m+2)`, `(6m+5)/(3m+3)` increase and
    /// `(2m+2)/(3m+3) = 2/3`, so for `α > 0` the suprema are the limits
    /// `2^α, 2^α, 2^α + (2/3)^α`, and for `α <= 0` they sit at `m0`.
    fn power_suprema(&self, alpha: &BigRational, m0: u64) -> [AnalyticSup; 3] {
        if !alpha.is_positive() {
            return self.at_index(m0);
        }
        let two = pow2(alpha);
        let two_thirds = if alpha.is_integer() {
            let e = alpha.to_integer().to_i32().expect("small exponent");
            Real::Exact(pow_rational(&crate::num::ratio(2, 3), e))
        } else {
            Real::Approx((2.0f64 / 3.0).powf(crate::num::rational_to_f64(alpha)))
        };
        let limit = |value: Real| AnalyticSup {
            value,
            attained: Attainment::Limit,
        };
        [limit(two.clone()), limit(two.clone()), limit(two + two_thirds)]
    }
}

const SEQUENCE_LABELS: [&str; 3] = [
    "omega(6m)/omega(3m)",
    "omega(6m+2)/omega(3m+1)",
    "(omega(6m+4)+omega(2m+1))/omega(3m+2)",
];

fn power_value(c: &BigRational, alpha: &BigRational, n: &BigUint) -> Real {
    if alpha.is_integer() {
        let e = alpha.to_integer().to_i32().expect("integer exponent fits i32");
        Real::Exact(c * pow_rational(&biguint_to_rational(&(n + 1u32)), e))
    } else {
        let a = crate::num::rational_to_f64(alpha);
        Real::Approx(crate::num::rational_to_f64(c) * (a * ln_biguint(&(n + 1u32))).exp())
    }
}

fn power_ratio(alpha: &BigRational, a: &BigUint, b: &BigUint) -> Real {
    let x = crate::num::rational_to_f64(alpha);
    Real::Approx((x * (ln_biguint(&(a + 1u32)) - ln_biguint(&(b + 1u32)))).exp())
}

fn power_bound(c: &BigRational, alpha: &BigRational, k: f64) -> f64 {
    let a = crate::num::rational_to_f64(alpha);
    let c = crate::num::rational_to_f64(c);
    let base = if a >= 0.0 { k } else { 2.0 * k };
    base.powf(-a) / c * (1.0 + 1e-12)
}

/// `((αm+β)/(γm+δ))_m` with positive coefficients is nondecreasing iff
/// `αδ >= βγ`.
pub fn affine_ratio_nondecreasing(alpha: &BigInt, beta: &BigInt, gamma: &BigInt, delta: &BigInt) -> bool {
    alpha * delta >= beta * gamma
}

/// Supremum over `m >= 1` of `(αm+β)/(γm+δ)` via the monotone-ratio rule.
pub fn affine_ratio_sup(alpha: i64, beta: i64, gamma: i64, delta: i64) -> AnalyticSup {
    let (a, b, c, d) = (BigInt::from(alpha), BigInt::from(beta), BigInt::from(gamma), BigInt::from(delta));
    if affine_ratio_nondecreasing(&a, &b, &c, &d) && &a * &d != &b * &c {
        AnalyticSup {
            value: Real::Exact(BigRational::new(a, c)),
            attained: Attainment::Limit,
        }
    } else {
        AnalyticSup {
            value: Real::Exact(BigRational::new(a + b, c + d)),
            attained: Attainment::AtIndex(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WeightPredicates {
    pub bounded_below: bool,
    /// `ω(k 2^n) → ∞` for every `k >= 3`.
    pub dyadic_divergent: bool,
    /// `Σ_n 1/ω(k 2^n) < ∞` for every `k >= 3`.
    pub dyadic_summable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attainment {
    /// Approached as `m → ∞`, never attained.
    Limit,
    AtIndex(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticSup {
    pub value: Real,
    pub attained: Attainment,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceSup {
    pub label: String,
    /// Maximum over `1 <= m <= m_max`.
    pub empirical: Real,
    pub empirical_argmax: u64,
    pub analytic: Option<AnalyticSup>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub bounded: bool,
    pub sequences: Vec<SequenceSup>,
    /// `‖𝒯‖²`, the largest analytic supremum.
    pub norm_sq: Option<Real>,
}

impl fmt::Display for WeightDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = format_rational;
        match self {
            WeightDescriptor::ClassicBergman => f.write_str("classic_bergman"),
            WeightDescriptor::PowerLaw { c, alpha } => write!(f, "power_law(c={}, alpha={})", r(c), r(alpha)),
            WeightDescriptor::Constant { c } => write!(f, "constant(c={})", r(c)),
            WeightDescriptor::Tabulated {
                table,
                tail_c,
                tail_alpha,
            } => write!(
                f,
                "tabulated(n0={}, c={}, alpha={})",
                table.len(),
                r(tail_c),
                r(tail_alpha)
            ),
        }
    }
}

// JSON: {"family": "...", "params": {name: "p/q" | decimal}}.

#[derive(Serialize, Deserialize)]
struct WeightJson {
    family: String,
    #[serde(default)]
    params: BTreeMap<String, serde_json::Value>,
}

fn param_value(q: &BigRational) -> serde_json::Value {
    serde_json::Value::String(format_rational(q))
}

fn read_param(params: &BTreeMap<String, serde_json::Value>, name: &str) -> Result<BigRational> {
    let v = params
        .get(name)
        .ok_or_else(|| Error::Parse(format!("missing weight parameter {name:?}")))?;
    value_to_rational(v)
}

fn value_to_rational(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

impl WeightDescriptor {
    pub fn to_json(&self) -> serde_json::Value {
        let mut params = BTreeMap::new();
        match self {
            WeightDescriptor::ClassicBergman => {}
            WeightDescriptor::PowerLaw { c, alpha } => {
                params.insert("c".to_string(), param_value(c));
                params.insert("alpha".to_string(), param_value(alpha));
            }
            WeightDescriptor::Constant { c } => {
                params.insert("c".to_string(), param_value(c));
            }
            WeightDescriptor::Tabulated {
                table,
                tail_c,
                tail_alpha,
            } => {
                params.insert(
                    "table".to_string(),
                    serde_json::Value::Array(table.iter().map(param_value).collect()),
                );
                params.insert("c".to_string(), param_value(tail_c));
                params.insert("alpha".to_string(), param_value(tail_alpha));
            }
        }
        serde_json::to_value(WeightJson {
            family: self.family_name().to_string(),
            params,
        })
        .expect("weight json")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: WeightJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let p = &raw.params;
        match raw.family.as_str() {
            "classic_bergman" => Ok(WeightDescriptor::ClassicBergman),
            "power_law" => WeightDescriptor::power_law(read_param(p, "c")?, read_param(p, "alpha")?),
            "constant" => WeightDescriptor::constant(read_param(p, "c")?),
            "tabulated" => {
                let table = match p.get("table") {
                    Some(serde_json::Value::Array(xs)) => {
                        xs.iter().map(value_to_rational).collect::<Result<Vec<_>>>()?
                    }
                    _ => return Err(Error::Parse("tabulated weight needs a \"table\" array".into())),
                };
                WeightDescriptor::tabulated(table, read_param(p, "c")?, read_param(p, "alpha")?)
            }
            other => Err(Error::Parse(format!("unknown weight family {other:?}"))),
        }
    }
}

impl Serialize for WeightDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        WeightDescriptor::from_json(&v).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn eval_examples() {
        let w = WeightDescriptor::classic();
        let v = w.eval(&b(3));
        assert_eq!(v.coeff, Real::Exact(int(4)));
        assert_eq!(v.pi_pow, -1);
        assert!((v.to_f64() - 4.0 / std::f64::consts::PI).abs() < 1e-15);

        let c = WeightDescriptor::constant(int(1)).unwrap();
        assert_eq!(c.eval(&b(1_000_000)).coeff, Real::Exact(int(1)));

        let p = WeightDescriptor::power_law(int(1), ratio(1, 2)).unwrap();
        assert!((p.eval(&b(7)).to_f64() - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn classic_ratios_are_exact() {
        let w = WeightDescriptor::classic();
        assert_eq!(w.ratio(&b(10), &b(5)), Real::Exact(ratio(11, 6)));
        for (a, c) in [(3u64, 5u64), (100, 7), (6, 3)] {
            let exact = w.ratio(&b(a), &b(c)).to_f64();
            let float = w.eval(&b(a)).to_f64() / w.eval(&b(c)).to_f64();
            assert!((exact - float).abs() < 1e-12);
        }
    }

    #[test]
    fn predicate_examples() {
        let all = WeightPredicates {
            bounded_below: true,
            dyadic_divergent: true,
            dyadic_summable: true,
        };
        assert_eq!(WeightDescriptor::classic().predicates(), all);
        assert_eq!(
            WeightDescriptor::constant(int(1)).unwrap().predicates(),
            WeightPredicates {
                bounded_below: true,
                dyadic_divergent: false,
                dyadic_summable: false
            }
        );
        let half = WeightDescriptor::power_law(int(1), ratio(1, 2)).unwrap();
        assert_eq!(half.predicates(), all);
        let decaying = WeightDescriptor::power_law(int(1), int(-1)).unwrap();
        assert!(!decaying.predicates().bounded_below);
        assert!(decaying.require_bounded_below().is_err());
    }

    #[test]
    fn half_power_dyadic_partial_sums_converge() {
        // Partial sums of 1/ω(k 2^n) for ω = (n+1)^{1/2} stabilise geometrically.
        let w = WeightDescriptor::power_law(int(1), ratio(1, 2)).unwrap();
        let k = b(3);
        let partial = |n_max: u32| -> f64 {
            (0..n_max)
                .map(|n| w.reciprocal(&(&k << n)).to_f64())
                .sum()
        };
        let (s40, s80) = (partial(40), partial(80));
        assert!((s80 - s40).abs() < 1e-5);
        let (c, a) = w.dyadic_reciprocal_bound(&k);
        let bound = c / (1.0 - 2f64.powf(-a));
        assert!(s80 <= bound);
    }

    #[test]
    fn classic_boundedness_triple() {
        let r = WeightDescriptor::classic().boundedness_check(1000);
        let sups: Vec<_> = r.sequences.iter().map(|s| s.analytic.clone().unwrap()).collect();
        assert_eq!(sups[0].value, Real::Exact(int(2)));
        assert_eq!(sups[1].value, Real::Exact(int(2)));
        assert_eq!(sups[2].value, Real::Exact(ratio(8, 3)));
        assert!(sups.iter().all(|s| s.attained == Attainment::Limit));
        assert_eq!(r.norm_sq, Some(Real::Exact(ratio(8, 3))));
        for s in &r.sequences {
            assert!(s.empirical < s.analytic.as_ref().unwrap().value);
        }
        assert_eq!(r.sequences[2].empirical_argmax, 1000);
    }

    #[test]
    fn constant_boundedness() {
        let r = WeightDescriptor::constant(int(1)).unwrap().boundedness_check(50);
        let v: Vec<_> = r.sequences.iter().map(|s| s.analytic.clone().unwrap().value).collect();
        assert_eq!(v, vec![Real::from_int(1), Real::from_int(1), Real::from_int(2)]);
        assert!(r.bounded);
        assert_eq!(r.norm_sq, Some(Real::from_int(2)));
    }

    #[test]
    fn power_law_suprema_dominate_terms() {
        for alpha in [int(1), int(2), ratio(1, 2), int(-1), int(0)] {
            let w = WeightDescriptor::power_law(ratio(3, 2), alpha.clone()).unwrap();
            let r = w.boundedness_check(2000);
            assert!(r.bounded);
            for s in &r.sequences {
                let sup = s.analytic.as_ref().unwrap().value.to_f64();
                assert!(s.empirical.to_f64() <= sup * (1.0 + 1e-12), "alpha {alpha}: {s:?}");
            }
        }
        let r = WeightDescriptor::power_law(int(1), int(1)).unwrap().boundedness_check(10);
        assert_eq!(r.norm_sq, Some(Real::Exact(ratio(8, 3))));
    }

    #[test]
    fn tabulated_suprema_cover_table_and_tail() {
        let table = vec![int(1), int(1), int(1), int(100), int(1), int(1), int(1), int(1)];
        let w = WeightDescriptor::tabulated(table, int(1), int(1)).unwrap();
        let r = w.boundedness_check(500);
        for s in &r.sequences {
            let a = s.analytic.as_ref().unwrap();
            assert!(s.empirical <= a.value, "{s:?}");
        }
        // ω(6)/ω(3) = 1/100 at m=1, but ω(12)/ω(6) = 13 at m=2 beats the limit 2.
        let first = r.sequences[0].analytic.as_ref().unwrap();
        assert_eq!(first.attained, Attainment::AtIndex(2));
        assert_eq!(first.value, Real::from_int(13));
    }

    #[test]
    fn monotone_ratio_rule_examples() {
        let i = |x: i64| BigInt::from(x);
        assert!(affine_ratio_nondecreasing(&i(8), &i(7), &i(3), &i(3)));
        assert!(!affine_ratio_nondecreasing(&i(1), &i(5), &i(1), &i(1)));
        assert_eq!(affine_ratio_sup(1, 5, 1, 1).attained, Attainment::AtIndex(1));
    }

    #[test]
    fn json_roundtrip_and_decimal_params() {
        for w in [
            WeightDescriptor::classic(),
            WeightDescriptor::power_law(int(2), ratio(1, 2)).unwrap(),
            WeightDescriptor::constant(ratio(3, 7)).unwrap(),
            WeightDescriptor::tabulated(vec![int(1), ratio(1, 2)], int(1), int(1)).unwrap(),
        ] {
            let s = serde_json::to_string(&w).unwrap();
            let back: WeightDescriptor = serde_json::from_str(&s).unwrap();
            assert_eq!(back, w);
        }
        let w: WeightDescriptor =
            serde_json::from_str(r#"{"family":"power_law","params":{"c":"1","alpha":0.5}}"#).unwrap();
        assert_eq!(w, WeightDescriptor::power_law(int(1), ratio(1, 2)).unwrap());
        assert!(serde_json::from_str::<WeightDescriptor>(r#"{"family":"constant","params":{"c":"0"}}"#).is_err());
        assert!(serde_json::from_str::<WeightDescriptor>(r#"{"family":"nope"}"#).is_err());
    }

    #[test]
    fn membership_boundary_is_exact() {
        let w = WeightDescriptor::classic();
        assert!(w.dyadic_series_converges(&Real::Exact(ratio(196, 100))));
        assert!(!w.dyadic_series_converges(&Real::Exact(int(2))));
        let half = WeightDescriptor::power_law(int(1), ratio(1, 2)).unwrap();
        // 2^{1/2}: 1.41 < √2 < 1.42
        assert!(half.dyadic_series_converges(&Real::Exact(ratio(141, 100))));
        assert!(!half.dyadic_series_converges(&Real::Exact(ratio(142, 100))));
    }
}
