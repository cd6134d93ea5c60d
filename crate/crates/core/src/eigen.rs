//! Eigenvector fields `h_m(μ, ·)` of `𝒯`.
//!
//! For `m >= 1`, `h_m(μ) = Σ_n μⁿ (z^{(6m+4)2ⁿ} − z^{(2m+1)2ⁿ})`; for `m = 0`,
//! `h_0(μ) = Σ_n μⁿ z^{2^{n+2}}`. Each field lives on one or two dyadic rays
//! `{o · 2^{e+n}}`, which is what every routine here iterates over.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::collatz::small;
use crate::error::{Error, Result};
use crate::num::{
    cis_pi, format_qcomplex, int, parse_qcomplex, parse_rational, qcomplex_to_c64, ratio, Cplx, QComplex, Real, C64,
};
use crate::space::{reciprocal_f64, AnyVec, CoeffVec, Degree, Scalar};
use crate::transfer::{apply_adjoint, apply_t, apply_t_power};
use crate::weights::WeightDescriptor;

/// One dyadic ray `{odd · 2^{exp+n} : n >= 0}` carrying `±μⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub odd: BigUint,
    pub exp: u64,
    pub negative: bool,
}

impl Ray {
    fn from_start(start: BigUint, negative: bool) -> Ray {
        let exp = start.trailing_zeros().unwrap_or(0);
        Ray {
            odd: start >> exp,
            exp,
            negative,
        }
    }

    pub fn start(&self) -> BigUint {
        &self.odd << self.exp
    }

    /// `n` with `d = odd · 2^{exp+n}`, if `d` lies on the ray.
    pub fn index_of(&self, d: &BigUint) -> Option<u64> {
        let e = d.trailing_zeros()?;
        (e >= self.exp && (d >> e) == self.odd).then(|| e - self.exp)
    }
}

/// The rays supporting `h_m`.
pub fn rays(m: u64) -> Vec<Ray> {
    if m == 0 {
        vec![Ray::from_start(BigUint::from(4u32), false)]
    } else {
        let m = BigUint::from(m);
        vec![
            Ray::from_start(&m * 6u32 + 4u32, false),
            Ray::from_start(&m * 2u32 + 1u32, true),
        ]
    }
}

/// Largest `n` with some ray start times `2ⁿ` at most `cap`.
fn max_power(m: u64, cap: &BigUint) -> Option<usize> {
    let smallest = rays(m).iter().map(Ray::start).min()?;
    if &smallest > cap {
        return None;
    }
    let mut n = 0usize;
    while &(&smallest << (n + 1)) <= cap {
        n += 1;
    }
    Some(n)
}

/// `h_m` truncated to degrees `<= cap`, with `pows[n] = μⁿ`.
pub fn build_h<S: Scalar>(m: u64, pows: &[S], cap: &BigUint) -> CoeffVec<S> {
    let mut v = CoeffVec::new();
    for ray in rays(m) {
        for (n, p) in pows.iter().enumerate() {
            let d = ray.start() << n;
            if &d > cap {
                break;
            }
            let c = if ray.negative { p.neg() } else { p.clone() };
            v.accumulate(Degree::new(d).expect("rays start at 3 or above"), c);
        }
    }
    v
}

fn successive_powers<S: Scalar>(mu: &S, one: S, count: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(count);
    let mut p = one;
    for _ in 0..count {
        out.push(p.clone());
        p = p.mul(mu);
    }
    out
}

/// Eigenvalue of a field: exact rational complex or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Mu {
    Exact(QComplex),
    Float(C64),
}

impl Mu {
    pub fn modulus_sq(&self) -> Real {
        match self {
            Mu::Exact(z) => Real::Exact(z.norm_sqr()),
            Mu::Float(z) => Real::Approx(z.norm_sqr()),
        }
    }

    pub fn to_c64(&self) -> C64 {
        match self {
            Mu::Exact(z) => qcomplex_to_c64(z),
            Mu::Float(z) => *z,
        }
    }

    pub fn to_cplx(&self) -> Cplx {
        match self {
            Mu::Exact(z) => Cplx::Exact(z.clone()),
            Mu::Float(z) => Cplx::Approx(*z),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Mu::Exact(z) => json!(format_qcomplex(z)),
            Mu::Float(z) => json!([z.re, z.im]),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_qcomplex(s).map(Mu::Exact),
            Value::Array(xs) if xs.len() == 2 => {
                if xs.iter().all(Value::is_string) {
                    let part = |x: &Value| parse_rational(x.as_str().expect("string"));
                    Ok(Mu::Exact(QComplex::new(part(&xs[0])?, part(&xs[1])?)))
                } else {
                    let part = |x: &Value| x.as_f64().ok_or_else(|| Error::Parse(format!("bad component {x}")));
                    Ok(Mu::Float(C64::new(part(&xs[0])?, part(&xs[1])?)))
                }
            }
            Value::Number(n) => parse_rational(&n.to_string()).map(|q| Mu::Exact(QComplex::new(q, int(0)))),
            other => Err(Error::Parse(format!("cannot read mu from {other}"))),
        }
    }
}

impl fmt::Display for Mu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mu::Exact(z) => f.write_str(&format_qcomplex(z)),
            Mu::Float(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// `h_m(μ, ·)` truncated at `cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSpec {
    pub m: u64,
    pub mu: Mu,
    pub cap: u64,
}

/// A truncated field with a bound on the squared norm of what was cut off.
#[derive(Clone, Debug, PartialEq)]
pub struct Materialized {
    pub vec: AnyVec,
    pub tail_norm_sq_bound: f64,
}

/// Whether `h_m(μ, ·) ∈ 𝒳_ω`: both ray series `Σ |μ|^{2n}/ω(k 2ⁿ)` converge,
/// i.e. `|μ|² < 2^α` for the dyadic growth exponent `α` of `ω`.
pub fn membership(_m: u64, mu_sq: &Real, w: &WeightDescriptor) -> bool {
    w.dyadic_series_converges(mu_sq)
}

/// `Σ_{n >= n0} q^n C 2^{-nα}`, or `None` when the ratio is not below 1.
fn geometric_tail(c: f64, alpha: f64, q: f64, n0: u64) -> Option<f64> {
    let ratio = q * 2f64.powf(-alpha);
    if ratio >= 1.0 {
        return None;
    }
    let first = c * ratio.powf(n0 as f64);
    Some(first / (1.0 - ratio))
}

/// Bound on `‖h_m − truncation‖²` from the dyadic reciprocal bound of `ω`.
pub fn tail_bound(m: u64, mu_sq: &Real, cap: &BigUint, w: &WeightDescriptor) -> Result<f64> {
    if !membership(m, mu_sq, w) {
        return Err(Error::Divergent(format!(
            "h_{m} with |mu|^2 = {mu_sq} is not in the space of {w}"
        )));
    }
    let q = mu_sq.to_f64();
    let mut total = 0.0;
    for ray in rays(m) {
        let start = ray.start();
        let mut n0 = 0u64;
        while &(&start << n0) <= cap {
            n0 += 1;
        }
        let (c, alpha) = w.dyadic_reciprocal_bound(&start);
        // Exact membership may hold while f64 rounding reaches ratio 1.
        total += geometric_tail(c, alpha, q, n0).unwrap_or(f64::INFINITY);
    }
    Ok(total)
}

impl EigenSpec {
    pub fn new(m: u64, mu: Mu, cap: u64) -> Self {
        EigenSpec { m, mu, cap }
    }

    pub fn exact(m: u64, mu: QComplex, cap: u64) -> Self {
        EigenSpec::new(m, Mu::Exact(mu), cap)
    }

    fn cap_big(&self) -> BigUint {
        BigUint::from(self.cap)
    }

    fn power_count(&self) -> usize {
        max_power(self.m, &self.cap_big()).map_or(0, |n| n + 1)
    }

    pub fn exact_vec(&self) -> Option<CoeffVec<QComplex>> {
        match &self.mu {
            Mu::Exact(mu) => {
                let pows = successive_powers(mu, QComplex::one(), self.power_count());
                Some(build_h(self.m, &pows, &self.cap_big()))
            }
            Mu::Float(_) => None,
        }
    }

    pub fn float_vec(&self) -> CoeffVec<C64> {
        let pows = successive_powers(&self.mu.to_c64(), C64::new(1.0, 0.0), self.power_count());
        build_h(self.m, &pows, &self.cap_big())
    }

    /// The truncated field and its tail bound; divergent fields are refused.
    pub fn materialize(&self, w: &WeightDescriptor) -> Result<Materialized> {
        let tail = tail_bound(self.m, &self.mu.modulus_sq(), &self.cap_big(), w)?;
        let vec = match self.exact_vec() {
            Some(v) => AnyVec::Rational(v),
            None => AnyVec::Float(self.float_vec()),
        };
        Ok(Materialized {
            vec,
            tail_norm_sq_bound: tail,
        })
    }

    /// Coefficient of the full series at degree `d`.
    pub fn coefficient_c64(&self, d: &BigUint) -> C64 {
        let mu = self.mu.to_c64();
        rays(self.m)
            .iter()
            .find_map(|ray| {
                ray.index_of(d).map(|n| {
                    let p = mu.powi(n as i32);
                    if ray.negative {
                        -p
                    } else {
                        p
                    }
                })
            })
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn to_json(&self) -> Value {
        json!({ "m": self.m, "mu": self.mu.to_json(), "cap": self.cap })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| v.get(name).ok_or_else(|| Error::Parse(format!("eigen spec needs {name:?}")));
        let m = field("m")?.as_u64().ok_or_else(|| Error::Parse("m must be a nonnegative integer".into()))?;
        let cap = field("cap")?.as_u64().ok_or_else(|| Error::Parse("cap must be a positive integer".into()))?;
        Ok(EigenSpec::new(m, Mu::from_json(field("mu")?)?, cap))
    }
}

impl Serialize for EigenSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Outcome of an operator identity checked on a safe window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowCheck {
    /// Largest degree checked.
    pub window: u64,
    pub degrees_in_window: usize,
    /// Largest `max(|Re|, |Im|)` of a residual coefficient in the window.
    pub residual: Real,
    pub nonzero_residuals: usize,
}

impl WindowCheck {
    pub fn is_zero(&self) -> bool {
        self.nonzero_residuals == 0
    }
}

fn window_residual<S: Scalar>(lhs: &CoeffVec<S>, rhs: &CoeffVec<S>, window: u64) -> WindowCheck {
    let cap = BigUint::from(window);
    let diff = lhs.sub(rhs).restrict(&cap);
    let mut residual = Real::zero();
    for (_, c) in diff.iter() {
        let z = c.to_cplx();
        let im = match &z {
            Cplx::Exact(q) => Real::Exact(q.im.abs()),
            Cplx::Approx(x) => Real::Approx(x.im.abs()),
        };
        let re = match z.re() {
            Real::Exact(q) => Real::Exact(q.abs()),
            Real::Approx(x) => Real::Approx(x.abs()),
        };
        residual = residual.max(re).max(im);
    }
    let degrees_in_window = lhs.restrict(&cap).len().max(rhs.restrict(&cap).len());
    WindowCheck {
        window,
        degrees_in_window,
        residual,
        nonzero_residuals: diff.len(),
    }
}

/// Safe window for `𝒯ᵗ` applied to a truncation at `cap`: every `t`-step
/// preimage of `d` is at most `2ᵗ d`, so degrees `d <= cap / 2ᵗ` see all of
/// their contributions.
pub fn safe_window(cap: u64, t: u32) -> Result<u64> {
    let w = cap.checked_shr(t).unwrap_or(0);
    if w < 3 {
        Err(Error::EmptyWindow(format!("cap {cap} leaves no degree >= 3 after {t} steps")))
    } else {
        Ok(w)
    }
}

/// `𝒯h − μh` on the safe window `d <= cap/2`.
pub fn verify_eigenrelation(spec: &EigenSpec) -> Result<WindowCheck> {
    let window = safe_window(spec.cap, 1)?;
    Ok(match (&spec.mu, spec.exact_vec()) {
        (Mu::Exact(mu), Some(h)) => window_residual(&apply_t(&h), &h.scale(mu), window),
        _ => {
            let h = spec.float_vec();
            window_residual(&apply_t(&h), &h.scale(&spec.mu.to_c64()), window)
        }
    })
}

/// `h_m(e^{iαπ}, ·)`; a periodic point of `𝒯`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicPoint {
    pub m: u64,
    pub alpha: String,
    pub cap: u64,
    pub period: u64,
    pub vec: CoeffVec<C64>,
}

/// Order of `e^{iπp/q}`: `2q / gcd(p, 2q)`.
pub fn root_of_unity_order(alpha: &BigRational) -> u64 {
    let p = alpha.numer().abs();
    let two_q = alpha.denom() * 2;
    let g = p.gcd(&two_q);
    (two_q / g).to_u64().expect("order fits u64")
}

/// Coefficients `μⁿ = e^{iπnα}` are computed from the exactly reduced angle
/// `nα mod 2`, so `μ^{n+t}` and `μⁿ` agree bit for bit when `μᵗ = 1`.
pub fn periodic_point(m: u64, alpha: &BigRational, cap: u64) -> PeriodicPoint {
    let capb = BigUint::from(cap);
    let count = max_power(m, &capb).map_or(0, |n| n + 1);
    let pows: Vec<C64> = (0..count)
        .map(|n| cis_pi(&(alpha * BigRational::from_integer((n as i64).into()))))
        .collect();
    PeriodicPoint {
        m,
        alpha: crate::num::format_rational(alpha),
        cap,
        period: root_of_unity_order(alpha),
        vec: build_h(m, &pows, &capb),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicCheck {
    pub period: u64,
    /// `𝒯^period h = h` on its safe window.
    pub returns_at_period: bool,
    /// Smallest `t >= 1` with `𝒯ᵗ h = h` on the window of `t`.
    pub first_return: Option<u64>,
    pub window_at_period: u64,
}

pub fn verify_periodic(p: &PeriodicPoint) -> Result<PeriodicCheck> {
    let window_at_period = safe_window(p.cap, p.period as u32)?;
    let mut first_return = None;
    let mut returns_at_period = false;
    let mut g = p.vec.clone();
    for t in 1..=p.period {
        g = apply_t(&g);
        let window = safe_window(p.cap, t as u32)?;
        let same = window_residual(&g, &p.vec, window).is_zero();
        if same && first_return.is_none() {
            first_return = Some(t);
        }
        if t == p.period {
            returns_at_period = same;
        }
    }
    Ok(PeriodicCheck {
        period: p.period,
        returns_at_period,
        first_return,
        window_at_period,
    })
}

/// `𝒯ᵗ h` versus `h` on the window `cap / 2ᵗ`.
pub fn periodic_residual(p: &PeriodicPoint, t: u64) -> Result<WindowCheck> {
    let window = safe_window(p.cap, t as u32)?;
    Ok(window_residual(&apply_t_power(&p.vec, t as usize), &p.vec, window))
}

/// Certified members on both sides of the unit circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GsWitnesses {
    pub rho: String,
    /// `|μ| < 1`.
    pub inside: Vec<EigenSpec>,
    /// `1 < |μ| < √ρ`.
    pub outside: Vec<EigenSpec>,
}

const DIRECTIONS: [(i64, i64, i64); 8] = [
    (1, 0, 1),
    (0, 1, 1),
    (-1, 0, 1),
    (0, -1, 1),
    (3, 4, 5),
    (-4, 3, 5),
    (-3, -4, 5),
    (4, -3, 5),
];

fn direction(i: usize) -> QComplex {
    let (a, b, c) = DIRECTIONS[i];
    QComplex::new(ratio(a, c), ratio(b, c))
}

/// Grids of `h_m(μ)` with `m <= 2` and Pythagorean directions, requiring
/// `(ρⁿ / ω(k 2ⁿ))ₙ` bounded, i.e. `ρ <= 2^α`.
pub fn godefroy_shapiro_witnesses(w: &WeightDescriptor, rho: &BigRational, cap: u64) -> Result<GsWitnesses> {
    if rho <= &BigRational::one() {
        return Err(Error::InvalidInput("rho must exceed 1".into()));
    }
    if !w.dyadic_dominates(rho) {
        return Err(Error::Predicate {
            predicate: "dyadic_domination",
            detail: format!(
                "rho^n / omega(k 2^n) is unbounded for rho = {} under {w}",
                crate::num::format_rational(rho)
            ),
        });
    }
    let inside_moduli = [ratio(1, 4), ratio(1, 2), ratio(3, 4), ratio(9, 10), ratio(99, 100)];
    let mut outside_moduli: Vec<BigRational> = (1..=40).map(|j| BigRational::one() + ratio(j, 20)).collect();
    outside_moduli.push(ratio(101, 100));
    outside_moduli.push(ratio(141, 100));
    outside_moduli.sort();
    outside_moduli.dedup();
    outside_moduli.retain(|r| &(r * r) < rho);

    let grid = |moduli: &[BigRational]| -> Result<Vec<EigenSpec>> {
        let mut out = Vec::new();
        for m in 0..=2u64 {
            for r in moduli {
                for i in 0..DIRECTIONS.len() {
                    let mu = direction(i) * r.clone();
                    let spec = EigenSpec::exact(m, mu, cap);
                    if !membership(m, &spec.mu.modulus_sq(), w) {
                        return Err(Error::Certificate(format!("h_{m}({}) is not a member", spec.mu)));
                    }
                    out.push(spec);
                }
            }
        }
        Ok(out)
    };
    Ok(GsWitnesses {
        rho: crate::num::format_rational(rho),
        inside: grid(&inside_moduli)?,
        outside: grid(&outside_moduli)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpanResidual {
    pub target: u64,
    pub family_size: usize,
    /// `‖z^k − proj‖²`, clamped at 0.
    pub residual_sq: f64,
    pub target_norm_sq: f64,
    /// `λ_max / λ_min` of the Gram matrix.
    pub condition: f64,
    /// Bound on the total neglected tail of all Gram series.
    pub tail_bound: f64,
}

/// Gram condition numbers above this are refused.
pub const MAX_GRAM_CONDITION: f64 = 1e12;
const GRAM_TAIL_TOL: f64 = 1e-12;

fn one_over_omega(w: &WeightDescriptor, d: &BigUint) -> f64 {
    reciprocal_f64(w, d) * std::f64::consts::PI.powi(-w.pi_pow())
}

/// `Σ_t a_t conj(b_t) / ω(o 2^t)` over the common part of two rays.
fn ray_pair_sum(w: &WeightDescriptor, ra: &Ray, mu_a: C64, rb: &Ray, mu_b: C64, tol: f64) -> Result<(C64, f64)> {
    if ra.odd != rb.odd {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    let (c, alpha) = w.dyadic_reciprocal_bound(&ra.odd);
    let (qa, qb) = (mu_a.norm(), mu_b.norm());
    let step = qa * qb * 2f64.powf(-alpha);
    if step >= 1.0 {
        return Err(Error::Divergent("Gram series does not converge".into()));
    }
    let t0 = ra.exp.max(rb.exp);
    let mut pa = mu_a.powi((t0 - ra.exp) as i32);
    let mut pb = mu_b.powi((t0 - rb.exp) as i32);
    let sign = if ra.negative != rb.negative { -1.0 } else { 1.0 };
    let mut sum = C64::new(0.0, 0.0);
    let mut t = t0;
    loop {
        let d = &ra.odd << t;
        sum += pa * pb.conj() * one_over_omega(w, &d) * sign;
        pa *= mu_a;
        pb *= mu_b;
        t += 1;
        let tail = c * pa.norm() * pb.norm() * 2f64.powf(-(t as f64) * alpha) / (1.0 - step);
        if tail < tol || (pa.norm() == 0.0 || pb.norm() == 0.0) {
            return Ok((sum, tail.max(0.0)));
        }
    }
}

/// `⟨h_a, h_b⟩` of the full (untruncated) series.
pub fn field_inner(w: &WeightDescriptor, a: &EigenSpec, b: &EigenSpec, tol: f64) -> Result<(C64, f64)> {
    let mut total = C64::new(0.0, 0.0);
    let mut tail = 0.0;
    for ra in rays(a.m) {
        for rb in rays(b.m) {
            let (s, t) = ray_pair_sum(w, &ra, a.mu.to_c64(), &rb, b.mu.to_c64(), tol)?;
            total += s;
            tail += t;
        }
    }
    Ok((total, tail))
}

/// Distance from `z^k` to the span of the (untruncated) family, by least
/// squares on the Hermitian Gram system.
pub fn span_residual(k: u64, family: &[EigenSpec], w: &WeightDescriptor) -> Result<SpanResidual> {
    let target = BigUint::from(k);
    Degree::new(target.clone())?;
    let target_norm_sq = one_over_omega(w, &target);
    for s in family {
        if !membership(s.m, &s.mu.modulus_sq(), w) {
            return Err(Error::Divergent(format!("h_{}({}) is not a member", s.m, s.mu)));
        }
    }
    let n = family.len();
    if n == 0 {
        return Ok(SpanResidual {
            target: k,
            family_size: 0,
            residual_sq: target_norm_sq,
            target_norm_sq,
            condition: 1.0,
            tail_bound: 0.0,
        });
    }
    let tol = GRAM_TAIL_TOL / (4 * n * n) as f64;
    let mut gram = DMatrix::<C64>::zeros(n, n);
    let mut tail_bound = 0.0;
    for i in 0..n {
        for j in 0..=i {
            // G_ij = ⟨h_j, h_i⟩
            let (v, t) = field_inner(w, &family[j], &family[i], tol)?;
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
            tail_bound += if i == j { t } else { 2.0 * t };
        }
    }
    // b_i = ⟨z^k, h_i⟩ = conj(h_i(k)) / ω(k)
    let b = DVector::<C64>::from_iterator(n, family.iter().map(|s| s.coefficient_c64(&target).conj() * target_norm_sq));
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_GRAM_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let chol = gram.cholesky().ok_or(Error::IllConditioned { condition })?;
    let c = chol.solve(&b);
    let explained: C64 = c.iter().zip(b.iter()).map(|(ci, bi)| ci.conj() * bi).sum();
    Ok(SpanResidual {
        target: k,
        family_size: n,
        residual_sq: (target_norm_sq - explained.re).max(0.0),
        target_norm_sq,
        condition,
        tail_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdjointEigenCheck {
    /// `𝒯* f = μ f` held.
    pub equal: bool,
    /// A degree where the two sides differ.
    pub witness_degree: Option<String>,
}

/// Tests `𝒯* f = μ f` on a finite vector. For `f ≠ 0` with top degree `D`,
/// `𝒯* f` has the nonzero coefficient `ω(2D)/ω(D) c_D` at `2D > D`, so the
/// relation always fails there.
pub fn adjoint_eigen_check<S: Scalar>(f: &CoeffVec<S>, mu: &S, w: &WeightDescriptor) -> Result<AdjointEigenCheck> {
    let lhs = apply_adjoint(f, w)?;
    let rhs = f.scale(mu);
    let diff = lhs.sub(&rhs);
    let witness = f
        .max_degree()
        .map(|d| d << 1u32)
        .filter(|d2| diff.get(d2).is_some())
        .or_else(|| diff.iter().next().map(|(d, _)| d.clone()));
    Ok(AdjointEigenCheck {
        equal: diff.is_empty(),
        witness_degree: witness.map(|d| d.to_string()),
    })
}

/// Smallest `u64` view of a degree, for reporting.
pub fn degree_u64(d: &BigUint) -> Option<u64> {
    small(d)
}
