//! Constructive dynamics: hypercyclic vectors built from the doubling right
//! inverse, a Gaussian mixture of unimodular eigenfields that `𝒯` leaves
//! invariant in law, and finite-horizon visit statistics.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::collatz::quotient_death_time;
use crate::eigen::{tail_bound, EigenSpec, Mu};
use crate::error::{Error, Result};
use crate::num::{format_rational, parse_rational, ratio, rational_to_f64, PiScaled, QComplex, Real, C64};
use crate::space::{reciprocal_f64, CoeffVec, Scalar};
use crate::transfer::{apply_t, apply_t_power, doubling_inverse_s_power};
use crate::weights::WeightDescriptor;

/// Rational bounds `333/106 < π < 355/113`.
fn pi_bounds() -> (BigRational, BigRational) {
    (ratio(333, 106), ratio(355, 113))
}

/// Rigorous `value <= bound` for a nonnegative `PiScaled` quantity.
pub fn pi_scaled_le(value: &PiScaled<Real>, bound: &BigRational) -> bool {
    match &value.coeff {
        Real::Exact(c) => {
            let (lo, hi) = pi_bounds();
            let factor = match value.pi_pow.cmp(&0) {
                Ordering::Greater => crate::num::pow_rational(&hi, value.pi_pow),
                Ordering::Less => crate::num::pow_rational(&lo, value.pi_pow),
                Ordering::Equal => BigRational::from_integer(1.into()),
            };
            &(c * factor) <= bound
        }
        Real::Approx(_) => value.to_f64() <= rational_to_f64(bound),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypercyclicCertificate {
    pub x: CoeffVec<QComplex>,
    pub targets: Vec<CoeffVec<QComplex>>,
    pub schedule: Vec<u64>,
    pub epsilon: BigRational,
    /// `‖𝒯^{N_i} x − target_i‖`.
    pub errors: Vec<f64>,
    pub weight: WeightDescriptor,
}

/// Budgets for the schedule search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HcBudget {
    pub max_shift: u64,
    pub orbit_steps: usize,
}

impl Default for HcBudget {
    fn default() -> Self {
        HcBudget {
            max_shift: 4096,
            orbit_steps: crate::collatz::DEFAULT_ORBIT_BUDGET,
        }
    }
}

/// Steps after which `𝒯ⁿ t = 0`.
fn block_death_time(t: &CoeffVec<QComplex>, budget: usize) -> Result<u64> {
    let mut worst = 0u64;
    for (d, _) in t.iter() {
        worst = worst.max(quotient_death_time(d, budget)? as u64);
    }
    Ok(worst)
}

/// `‖S^n t‖² <= bound²`.
fn shifted_norm_ok(t: &CoeffVec<QComplex>, n: u64, bound: &BigRational, w: &WeightDescriptor) -> bool {
    let v = doubling_inverse_s_power(t, n as usize).norm_sq(w);
    pi_scaled_le(&v, &(bound * bound))
}

fn two_pow_neg(k: u64) -> BigRational {
    BigRational::new(1.into(), num_bigint::BigInt::from(1u32) << k)
}

/// `x = Σ_i S^{N_i} t_i` with, for each `i`,
/// (a) `‖S^{N_i} t_i‖ <= ε 2^{-i-1}`,
/// (b) `N_i >= N_j + D_j` for `j < i`, `D_j` the death time of `t_j`,
/// (c) `‖S^{N_i - N_j} t_i‖ <= ε 2^{-(i-j)-1}` for `j < i`,
/// taking the smallest `N_i` found by doubling then bisecting. Then
/// `𝒯^{N_i} x − t_i = Σ_{j>i} S^{N_j-N_i} t_j` has norm below `ε/2`.
pub fn build_hypercyclic_vector(
    targets: &[CoeffVec<QComplex>],
    epsilon: &BigRational,
    w: &WeightDescriptor,
    budget: HcBudget,
) -> Result<HypercyclicCertificate> {
    w.require_bounded_below()?;
    if !w.predicates().dyadic_divergent {
        return Err(Error::Predicate {
            predicate: "dyadic_divergent",
            detail: format!("omega(k 2^n) does not tend to infinity for {w}"),
        });
    }
    if *epsilon <= BigRational::zero() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let mut schedule: Vec<u64> = Vec::with_capacity(targets.len());
    let mut deaths: Vec<u64> = Vec::with_capacity(targets.len());
    for (i, t) in targets.iter().enumerate() {
        let lower = schedule
            .iter()
            .zip(&deaths)
            .map(|(n, d)| n + d.max(&1))
            .max()
            .unwrap_or(0);
        let ok = |n: u64| -> bool {
            shifted_norm_ok(t, n, &(epsilon * two_pow_neg(i as u64 + 1)), w)
                && schedule
                    .iter()
                    .enumerate()
                    .all(|(j, nj)| shifted_norm_ok(t, n - nj, &(epsilon * two_pow_neg((i - j) as u64 + 1)), w))
        };
        let n = smallest_passing(lower, budget.max_shift, ok)?;
        schedule.push(n);
        deaths.push(block_death_time(t, budget.orbit_steps)?);
    }
    let mut x = CoeffVec::new();
    for (t, n) in targets.iter().zip(&schedule) {
        x = x.add(&doubling_inverse_s_power(t, *n as usize));
    }
    let mut cert = HypercyclicCertificate {
        x,
        targets: targets.to_vec(),
        schedule,
        epsilon: epsilon.clone(),
        errors: Vec::new(),
        weight: w.clone(),
    };
    cert.errors = verify_certificate(&cert)?;
    Ok(cert)
}

/// Smallest `n >= lower` with `ok(n)`: doubling steps, then bisection.
fn smallest_passing<F: Fn(u64) -> bool>(lower: u64, max_shift: u64, ok: F) -> Result<u64> {
    if ok(lower) {
        return Ok(lower);
    }
    let mut fail = lower;
    let mut step = 1u64;
    let pass = loop {
        let cand = lower + step;
        if cand > lower + max_shift {
            return Err(Error::Budget {
                what: "schedule shift",
                limit: max_shift,
                reached: step,
            });
        }
        if ok(cand) {
            break cand;
        }
        fail = cand;
        step *= 2;
    };
    let (mut lo, mut hi) = (fail, pass);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Recomputes every `‖𝒯^{N_i} x − t_i‖` from scratch and checks each is at
/// most `ε`, along with the schedule invariants.
pub fn verify_certificate(c: &HypercyclicCertificate) -> Result<Vec<f64>> {
    if c.schedule.len() != c.targets.len() {
        return Err(Error::Certificate("schedule and targets differ in length".into()));
    }
    if c.schedule.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Certificate("schedule is not strictly increasing".into()));
    }
    let eps_sq = &c.epsilon * &c.epsilon;
    let mut errors = Vec::with_capacity(c.targets.len());
    for (i, (t, n)) in c.targets.iter().zip(&c.schedule).enumerate() {
        let diff = apply_t_power(&c.x, *n as usize).sub(t);
        let e = diff.norm_sq(&c.weight);
        if !pi_scaled_le(&e, &eps_sq) {
            return Err(Error::Certificate(format!(
                "error {} at schedule point {i} exceeds epsilon",
                e.to_f64().sqrt()
            )));
        }
        errors.push(e.to_f64().sqrt());
    }
    Ok(errors)
}

impl HypercyclicCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "x": self.x.to_json(),
            "targets": self.targets.iter().map(CoeffVec::to_json).collect::<Vec<_>>(),
            "schedule": self.schedule,
            "epsilon": format_rational(&self.epsilon),
            "errors": self.errors,
            "weight": self.weight.to_json(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| v.get(name).ok_or_else(|| Error::Parse(format!("certificate needs {name:?}")));
        let targets = field("targets")?
            .as_array()
            .ok_or_else(|| Error::Parse("targets must be an array".into()))?
            .iter()
            .map(CoeffVec::from_json)
            .collect::<Result<Vec<_>>>()?;
        let schedule: Vec<u64> =
            serde_json::from_value(field("schedule")?.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let errors: Vec<f64> =
            serde_json::from_value(field("errors")?.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let epsilon = match field("epsilon")? {
            Value::String(s) => parse_rational(s)?,
            other => parse_rational(&other.to_string())?,
        };
        Ok(HypercyclicCertificate {
            x: CoeffVec::from_json(field("x")?)?,
            targets,
            schedule,
            epsilon,
            errors,
            weight: WeightDescriptor::from_json(field("weight")?)?,
        })
    }
}

/// Mixture shape: `L` atoms on each field `h_0, …, h_M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureShape {
    pub max_m: u64,
    pub atoms_per_m: usize,
}

impl MixtureShape {
    pub fn atom_count(&self) -> usize {
        (self.max_m as usize + 1) * self.atoms_per_m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub m: u64,
    pub mu: C64,
    pub g: C64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMixtureSample {
    pub atoms: Vec<Atom>,
    pub seed: u64,
    pub run: u64,
}

/// Words reserved per atom in the generator stream.
const WORDS_PER_ATOM: u128 = 1 << 20;

fn draw_atom(seed: u64, run: u64, index: usize, m: u64, scale: f64) -> Atom {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng.set_word_pos(index as u128 * WORDS_PER_ATOM);
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Atom {
        m,
        mu: C64::from_polar(1.0, theta),
        g: C64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2,
        scale,
    }
}

fn require_summable(w: &WeightDescriptor) -> Result<()> {
    w.require_bounded_below()?;
    if w.predicates().dyadic_summable {
        Ok(())
    } else {
        Err(Error::Predicate {
            predicate: "dyadic_summable",
            detail: format!("unimodular eigenfields are not in the space of {w}"),
        })
    }
}

/// Atoms `(m, μ, g, 2^{-m}/√L)` with `μ` uniform on the circle and `g`
/// standard complex Gaussian. Atom `a` of run `r` reads the ChaCha8 stream
/// `r` of `seed` at word `a · 2^20`, so results do not depend on scheduling.
pub fn sample_invariant(shape: MixtureShape, w: &WeightDescriptor, seed: u64, run: u64) -> Result<GaussianMixtureSample> {
    require_summable(w)?;
    Ok(sample_unchecked(shape, seed, run))
}

fn sample_unchecked(shape: MixtureShape, seed: u64, run: u64) -> GaussianMixtureSample {
    let norm = (shape.atoms_per_m as f64).sqrt();
    let mut atoms = Vec::with_capacity(shape.atom_count());
    for m in 0..=shape.max_m {
        let scale = 2f64.powi(-(m as i32)) / norm;
        for l in 0..shape.atoms_per_m {
            let index = m as usize * shape.atoms_per_m + l;
            atoms.push(draw_atom(seed, run, index, m, scale));
        }
    }
    GaussianMixtureSample { atoms, seed, run }
}

/// `𝒯` on the mixture: `g ↦ μ g` for every atom.
pub fn apply_t_symbolic(s: &GaussianMixtureSample) -> GaussianMixtureSample {
    GaussianMixtureSample {
        atoms: s
            .atoms
            .iter()
            .map(|a| Atom {
                g: a.mu * a.g,
                ..a.clone()
            })
            .collect(),
        ..s.clone()
    }
}

fn atom_spec(a: &Atom, cap: u64) -> EigenSpec {
    EigenSpec::new(a.m, Mu::Float(a.mu), cap)
}

/// `Σ scale · g · h_m(μ)` truncated at `cap`, and a bound on the norm of
/// the part cut off (triangle inequality over per-atom tail bounds).
pub fn materialize_sample(s: &GaussianMixtureSample, cap: u64, w: &WeightDescriptor) -> Result<(CoeffVec<C64>, f64)> {
    let mut v = CoeffVec::new();
    let mut bound = 0.0;
    let capb = BigUint::from(cap);
    for a in &s.atoms {
        let spec = atom_spec(a, cap);
        v = v.add(&spec.float_vec().scale(&(a.g * a.scale)));
        // |μ| = 1 up to rounding; certify membership at exactly 1.
        let t = tail_bound(a.m, &Real::one(), &capb, w)?;
        bound += a.scale * a.g.norm() * t.sqrt();
    }
    Ok((v, bound))
}

/// `⟨x, f⟩` for the untruncated mixture `x`, summed over the support of
/// `f`; equals the inner product with any materialization whose cap covers
/// that support.
pub fn sample_inner(s: &GaussianMixtureSample, f: &CoeffVec<C64>, w: &WeightDescriptor) -> C64 {
    let pi_factor = std::f64::consts::PI.powi(-w.pi_pow());
    let mut total = C64::new(0.0, 0.0);
    for (d, c) in f.iter() {
        let inv = reciprocal_f64(w, d) * pi_factor;
        let mut at_d = C64::new(0.0, 0.0);
        for a in &s.atoms {
            let coeff = atom_spec(a, 0).coefficient_c64(d);
            if coeff.re != 0.0 || coeff.im != 0.0 {
                at_d += a.g * a.scale * coeff;
            }
        }
        total += at_d * c.conj() * inv;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// `Q(λ) = 2 Σ (−1)^{j−1} e^{−2 j² λ²}`, `λ = (√nₑ + 0.12 + 0.11/√nₑ) D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    let en = (n1 * n2 / (n1 + n2)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    KsResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    }
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let a2 = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 2.0;
    let mut prev = 0.0f64;
    for j in 1..=100 {
        let jf = j as f64;
        let term = sign * (a2 * jf * jf).exp();
        sum += term;
        if term.abs() <= 1e-10 * prev || term.abs() <= 1e-16 * sum.abs() {
            return sum.clamp(0.0, 1.0);
        }
        sign = -sign;
        prev = term.abs();
    }
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub runs: usize,
    pub seed: u64,
    pub ks_re: Option<KsResult>,
    pub ks_im: Option<KsResult>,
    /// Bonferroni combination `min(1, 2 min(p_re, p_im))`.
    pub p_value: Option<f64>,
    pub skipped: Option<String>,
}

/// Compares the laws of `⟨x, f⟩` and `factor · ⟨𝒯x, f⟩` over `runs`
/// independent pairs. Run `r` draws `x` from stream `2r` and the sample fed
/// through `𝒯` from stream `2r + 1`. With `factor = 1` the null holds.
pub fn invariance_test_with(
    shape: MixtureShape,
    f: &CoeffVec<C64>,
    runs: usize,
    seed: u64,
    w: &WeightDescriptor,
    factor: f64,
) -> Result<InvarianceReport> {
    require_summable(w)?;
    let skipped = |why: &str| InvarianceReport {
        runs,
        seed,
        ks_re: None,
        ks_im: None,
        p_value: None,
        skipped: Some(why.to_string()),
    };
    if f.is_empty() {
        return Ok(skipped("functional is zero; both laws are a point mass at 0"));
    }
    let pairs: Vec<(C64, C64)> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let a = sample_unchecked(shape, seed, 2 * r);
            let b = apply_t_symbolic(&sample_unchecked(shape, seed, 2 * r + 1));
            (sample_inner(&a, f, w), sample_inner(&b, f, w) * factor)
        })
        .collect();
    if pairs.iter().all(|(a, b)| a.norm() == 0.0 && b.norm() == 0.0) {
        return Ok(skipped("functional misses every eigenfield support; both laws are degenerate"));
    }
    let part = |sel: fn(&C64) -> f64| -> KsResult {
        let a: Vec<f64> = pairs.iter().map(|p| sel(&p.0)).collect();
        let b: Vec<f64> = pairs.iter().map(|p| sel(&p.1)).collect();
        ks_two_sample(&a, &b)
    };
    let ks_re = part(|z| z.re);
    let ks_im = part(|z| z.im);
    Ok(InvarianceReport {
        runs,
        seed,
        p_value: Some((2.0 * ks_re.p_value.min(ks_im.p_value)).min(1.0)),
        ks_re: Some(ks_re),
        ks_im: Some(ks_im),
        skipped: None,
    })
}

pub fn invariance_test(
    shape: MixtureShape,
    f: &CoeffVec<C64>,
    runs: usize,
    seed: u64,
    w: &WeightDescriptor,
) -> Result<InvarianceReport> {
    invariance_test_with(shape, f, runs, seed, w, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub samples: usize,
    /// `E[g], E[g²], E[|g|²]` before `𝒯`, as `[re, im]` pairs.
    pub before: [[f64; 2]; 3],
    pub after: [[f64; 2]; 3],
    pub max_difference: f64,
    /// `5/√runs`.
    pub tolerance: f64,
}

/// Empirical amplitude moments before and after `(μ, g) ↦ (μ, μg)`.
pub fn moment_check(shape: MixtureShape, runs: usize, seed: u64) -> MomentReport {
    let per_run: Vec<Vec<(C64, C64)>> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let s = sample_unchecked(shape, seed, r);
            s.atoms.iter().map(|a| (a.g, a.mu * a.g)).collect()
        })
        .collect();
    let all: Vec<(C64, C64)> = per_run.into_iter().flatten().collect();
    let n = all.len().max(1) as f64;
    let moments = |pick: fn(&(C64, C64)) -> C64| -> [C64; 3] {
        let mut acc = [C64::new(0.0, 0.0); 3];
        for p in &all {
            let g = pick(p);
            acc[0] += g;
            acc[1] += g * g;
            acc[2] += C64::new(g.norm_sqr(), 0.0);
        }
        acc.map(|x| x / n)
    };
    let before = moments(|p| p.0);
    let after = moments(|p| p.1);
    let max_difference = before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let pair = |z: [C64; 3]| z.map(|c| [c.re, c.im]);
    MomentReport {
        samples: all.len(),
        before: pair(before),
        after: pair(after),
        max_difference,
        tolerance: 5.0 / (runs.max(1) as f64).sqrt(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisitReport {
    pub horizon: u64,
    pub hits: u64,
    /// `hits / (horizon + 1)`.
    pub frequency: f64,
    pub hit_times: Vec<u64>,
}

/// Fraction of `0 <= n <= N` with `‖𝒯ⁿx − target‖ < eps`.
pub fn visit_frequency<S: Scalar>(
    x: &CoeffVec<S>,
    target: &CoeffVec<S>,
    eps: f64,
    horizon: u64,
    w: &WeightDescriptor,
) -> VisitReport {
    let mut hit_times = Vec::new();
    let mut g = x.clone();
    for n in 0..=horizon {
        if n > 0 {
            g = apply_t(&g);
        }
        if g.sub(target).norm_sq(w).to_f64().sqrt() < eps {
            hit_times.push(n);
        }
    }
    VisitReport {
        horizon,
        hits: hit_times.len() as u64,
        frequency: hit_times.len() as f64 / (horizon + 1) as f64,
        hit_times,
    }
}

impl GaussianMixtureSample {
    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "run": self.run,
            "atoms": self.atoms.iter().map(|a| json!({
                "m": a.m,
                "mu": [a.mu.re, a.mu.im],
                "g": [a.g.re, a.g.im],
                "scale": a.scale,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct RawAtom {
            m: u64,
            mu: [f64; 2],
            g: [f64; 2],
            scale: f64,
        }
        #[derive(Deserialize)]
        struct Raw {
            seed: u64,
            run: u64,
            atoms: Vec<RawAtom>,
        }
        let raw: Raw = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(GaussianMixtureSample {
            seed: raw.seed,
            run: raw.run,
            atoms: raw
                .atoms
                .into_iter()
                .map(|a| Atom {
                    m: a.m,
                    mu: C64::new(a.mu[0], a.mu[1]),
                    g: C64::new(a.g[0], a.g[1]),
                    scale: a.scale,
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::periodic_point;
    use crate::num::{int, qreal};

    fn q(d: u64, c: i64) -> CoeffVec<QComplex> {
        CoeffVec::monomial(d, qreal(int(c))).unwrap()
    }

    fn w0() -> WeightDescriptor {
        WeightDescriptor::classic()
    }

    #[test]
    fn single_target_schedule() {
        let eps = ratio(1, 1000);
        let c = build_hypercyclic_vector(&[q(3, 1)], &eps, &w0(), HcBudget::default()).unwrap();
        assert_eq!(c.schedule.len(), 1);
        let n = c.schedule[0];
        // ‖S^N z³‖² = π/(3·2^N + 1) <= (ε/2)², smallest such N.
        let pi = std::f64::consts::PI;
        assert!(pi / (3.0 * 2f64.powi(n as i32) + 1.0) <= 1e-6);
        assert!(pi / (3.0 * 2f64.powi(n as i32 - 1) + 1.0) > 0.25e-6);
        assert_eq!(c.errors, vec![0.0]);
    }

    #[test]
    fn two_targets_and_empty() {
        let eps = ratio(1, 1000);
        let t = vec![q(3, 1), q(4, 2)];
        let c = build_hypercyclic_vector(&t, &eps, &w0(), HcBudget::default()).unwrap();
        assert!(c.errors.iter().all(|&e| e <= 1e-3));
        assert!(c.schedule[1] > c.schedule[0]);
        let e = build_hypercyclic_vector(&[], &eps, &w0(), HcBudget::default()).unwrap();
        assert!(e.x.is_empty() && e.schedule.is_empty());
    }

    #[test]
    fn certificate_refuses_constant_weight() {
        let c = WeightDescriptor::constant(int(1)).unwrap();
        assert!(matches!(
            build_hypercyclic_vector(&[q(3, 1)], &ratio(1, 10), &c, HcBudget::default()),
            Err(Error::Predicate { .. })
        ));
    }

    #[test]
    fn tampered_certificate_fails() {
        let eps = ratio(1, 1000);
        let mut c = build_hypercyclic_vector(&[q(3, 1), q(7, 1)], &eps, &w0(), HcBudget::default()).unwrap();
        // z³ dies before any schedule point, so it leaves the errors alone.
        let mut harmless = c.clone();
        harmless.x = harmless.x.add(&q(3, 1));
        assert!(verify_certificate(&harmless).is_ok());
        c.targets[0] = q(3, 2);
        assert!(verify_certificate(&c).is_err());
        c.targets[0] = q(3, 1);
        c.schedule.swap(0, 1);
        assert!(verify_certificate(&c).is_err());
    }

    #[test]
    fn certificate_json_roundtrip() {
        let c = build_hypercyclic_vector(&[q(3, 1), q(5, -1)], &ratio(1, 100), &w0(), HcBudget::default()).unwrap();
        let back = HypercyclicCertificate::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn pi_bounds_are_rigorous() {
        let (lo, hi) = pi_bounds();
        assert!(rational_to_f64(&lo) < std::f64::consts::PI);
        assert!(rational_to_f64(&hi) > std::f64::consts::PI);
    }

    #[test]
    fn sample_shapes_and_determinism() {
        let w = w0();
        let s = sample_invariant(MixtureShape { max_m: 0, atoms_per_m: 1 }, &w, 7, 0).unwrap();
        assert_eq!(s.atoms.len(), 1);
        assert_eq!(s.atoms[0].m, 0);
        let shape = MixtureShape { max_m: 5, atoms_per_m: 8 };
        let a = sample_invariant(shape, &w, 42, 3).unwrap();
        let b = sample_invariant(shape, &w, 42, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.atoms.len(), 48);
        assert!(a.atoms.iter().all(|t| (t.mu.norm() - 1.0).abs() < 1e-15));
        assert_ne!(a, sample_invariant(shape, &w, 42, 4).unwrap());
        let c = WeightDescriptor::constant(int(1)).unwrap();
        assert!(sample_invariant(shape, &c, 1, 0).is_err());
    }

    #[test]
    fn atoms_do_not_depend_on_shape() {
        let w = w0();
        let small = sample_invariant(MixtureShape { max_m: 1, atoms_per_m: 2 }, &w, 9, 0).unwrap();
        let big = sample_invariant(MixtureShape { max_m: 3, atoms_per_m: 2 }, &w, 9, 0).unwrap();
        for (a, b) in small.atoms.iter().zip(&big.atoms) {
            assert_eq!((a.mu, a.g), (b.mu, b.g));
        }
    }

    #[test]
    fn symbolic_action() {
        let s = GaussianMixtureSample {
            atoms: vec![Atom {
                m: 1,
                mu: C64::new(0.0, 1.0),
                g: C64::new(1.0, 0.5),
                scale: 1.0,
            }],
            seed: 0,
            run: 0,
        };
        let t = apply_t_symbolic(&s);
        assert_eq!(t.atoms[0].g, C64::new(-0.5, 1.0));
        let mut u = s.clone();
        for _ in 0..4 {
            u = apply_t_symbolic(&u);
        }
        assert_eq!(u.atoms[0].g, s.atoms[0].g);
    }

    #[test]
    fn materialize_examples() {
        let w = w0();
        let s = GaussianMixtureSample {
            atoms: vec![Atom {
                m: 1,
                mu: C64::new(1.0, 0.0),
                g: C64::new(1.0, 0.0),
                scale: 1.0,
            }],
            seed: 0,
            run: 0,
        };
        let (v, b12) = materialize_sample(&s, 12, &w).unwrap();
        let expect = CoeffVec::from_terms([
            (3, C64::new(-1.0, 0.0)),
            (6, C64::new(-1.0, 0.0)),
            (10, C64::new(1.0, 0.0)),
            (12, C64::new(-1.0, 0.0)),
        ])
        .unwrap();
        assert_eq!(v, expect);
        let (_, b24) = materialize_sample(&s, 24, &w).unwrap();
        assert!(b24 <= b12 && b12 > 0.0);
        let empty = GaussianMixtureSample {
            atoms: vec![],
            seed: 0,
            run: 0,
        };
        assert!(materialize_sample(&empty, 64, &w).unwrap().0.is_empty());
    }

    #[test]
    fn symbolic_and_materialized_action_agree_on_window() {
        let w = w0();
        let mut s = sample_invariant(MixtureShape { max_m: 2, atoms_per_m: 2 }, &w, 5, 0).unwrap();
        for a in &mut s.atoms {
            a.mu = C64::new(0.0, 1.0);
        }
        let cap = 1 << 12;
        let (x, _) = materialize_sample(&s, cap, &w).unwrap();
        let (tx, _) = materialize_sample(&apply_t_symbolic(&s), cap, &w).unwrap();
        let window = BigUint::from(cap / 2);
        let lhs = apply_t(&x).restrict(&window);
        let rhs = tx.restrict(&window);
        assert!(lhs.sub(&rhs).max_abs() < 1e-14);
        let nl = lhs.norm_sq(&w).to_f64();
        let nr = rhs.norm_sq(&w).to_f64();
        assert!((nl - nr).abs() < 1e-12);
    }

    #[test]
    fn sample_inner_matches_materialization() {
        let w = w0();
        let s = sample_invariant(MixtureShape { max_m: 3, atoms_per_m: 3 }, &w, 11, 2).unwrap();
        let f = CoeffVec::from_terms([(3, C64::new(1.0, 0.0)), (4, C64::new(0.0, 2.0)), (20, C64::new(-1.0, 1.0))])
            .unwrap();
        let (x, _) = materialize_sample(&s, 64, &w).unwrap();
        let direct = x.inner(&f, &w).to_c64();
        assert!((direct - sample_inner(&s, &f, &w)).norm() < 1e-13);
    }

    #[test]
    fn ks_basics() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let r = ks_two_sample(&a, &b);
        assert!((r.statistic - 0.5).abs() <= 0.002 + 1e-12);
        assert!(r.p_value < 1e-10);
        // Q(1.36) ≈ 0.0494, the classical 5% point.
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 5e-4);
    }

    #[test]
    fn invariance_small_run() {
        let w = w0();
        let f = CoeffVec::from_terms([(3, C64::new(1.0, 0.0)), (4, C64::new(1.0, 0.0))]).unwrap();
        let shape = MixtureShape { max_m: 2, atoms_per_m: 4 };
        let r = invariance_test(shape, &f, 400, 1, &w).unwrap();
        assert!(r.p_value.unwrap() > 1e-4);
        let mismatch = invariance_test_with(shape, &f, 2000, 1, &w, 2.0).unwrap();
        assert!(mismatch.p_value.unwrap() < 0.01);
        let zero = invariance_test(shape, &CoeffVec::new(), 10, 1, &w).unwrap();
        assert!(zero.skipped.is_some() && zero.p_value.is_none());
    }

    #[test]
    fn moments_agree() {
        let r = moment_check(MixtureShape { max_m: 1, atoms_per_m: 4 }, 500, 3);
        assert_eq!(r.samples, 4000);
        assert!(r.max_difference <= r.tolerance);
        assert!((r.before[2][0] - 1.0).abs() < 0.1);
    }

    #[test]
    fn visits() {
        let w = w0();
        let eps = ratio(1, 1000);
        let c = build_hypercyclic_vector(&[q(3, 1), q(7, 1)], &eps, &w, HcBudget::default()).unwrap();
        let n = c.schedule[0];
        let r = visit_frequency(&c.x, &c.targets[0], 1e-3, n, &w);
        assert!(r.hit_times.contains(&n));
        assert!(r.frequency >= 1.0 / (n + 1) as f64);

        let p = periodic_point(0, &ratio(1, 2), 1 << 30);
        let r = visit_frequency(&p.vec, &p.vec, 1e-2, 12, &w);
        assert_eq!(r.hit_times, vec![0, 4, 8, 12]);
        assert!(r.frequency >= 0.25);

        let far = q(3, 1000);
        assert_eq!(visit_frequency(&q(5, 1), &far, 1.0, 20, &w).hits, 0);
    }

    #[test]
    fn sample_json_roundtrip() {
        let s = sample_invariant(MixtureShape { max_m: 1, atoms_per_m: 2 }, &w0(), 1, 0).unwrap();
        assert_eq!(GaussianMixtureSample::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn parse_epsilon_exactly() {
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        let _ = qreal(int(0));
    }
}
