//! The transfer operator `𝒯 z^j = z^{T(j)}`, its powers and adjoint, the
//! doubling right inverse `S z^k = z^{2k}`, and iterate-norm scans.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::collatz::{preimage_tree, preimages, t_step};
use crate::error::Result;
use crate::num::Real;
use crate::space::{CoeffVec, Degree, Scalar};
use crate::weights::{BoundednessReport, WeightDescriptor};

/// `𝒯f`; terms landing below degree 3 vanish.
pub fn apply_t<S: Scalar>(f: &CoeffVec<S>) -> CoeffVec<S> {
    f.map_degrees(t_step)
}

/// `𝒯ⁿf` by direct `n`-fold application.
pub fn apply_t_power<S: Scalar>(f: &CoeffVec<S>, n: usize) -> CoeffVec<S> {
    let mut g = f.clone();
    for _ in 0..n {
        if g.is_empty() {
            break;
        }
        g = apply_t(&g);
    }
    g
}

/// `𝒯* g = Σ_{k>=3, T(k)>=3} (ω(k)/ω(T(k))) c_{T(k)}(g) z^k`.
///
/// Each input degree spawns one output term per preimage `>= 3`. Exact
/// vectors require an exactly evaluable weight.
pub fn apply_adjoint<S: Scalar>(g: &CoeffVec<S>, w: &WeightDescriptor) -> Result<CoeffVec<S>> {
    let mut out = CoeffVec::new();
    for (m, c) in g.iter() {
        for k in preimages(m) {
            let r = w.ratio(&k, m);
            let term = c.scale_real(&r)?;
            out.accumulate(Degree::try_new(k).expect("preimages are >= 3"), term);
        }
    }
    Ok(out)
}

/// `S f`, doubling every degree. `𝒯 S = id`.
pub fn doubling_inverse_s<S: Scalar>(f: &CoeffVec<S>) -> CoeffVec<S> {
    doubling_inverse_s_power(f, 1)
}

pub fn doubling_inverse_s_power<S: Scalar>(f: &CoeffVec<S>, n: usize) -> CoeffVec<S> {
    f.map_degrees(|d| d << n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    /// The supremum over all `k` is known exactly.
    ExactLimit,
    /// Only a maximum over the scanned `k`.
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterateNormReport {
    pub n: usize,
    pub best_k: u64,
    /// `Σ_{Tⁿ(j)=best_k} ω(j)/ω(best_k)`, the best scanned contribution.
    pub value: Real,
    pub scan_bound: u64,
    pub exactness: Exactness,
    /// The supremum over all `k`, present only when `exactness` is
    /// `ExactLimit`.
    pub exact_value: Option<Real>,
}

/// `Σ_{j ∈ preimage_tree(k, n)} ω(j)/ω(k)`.
pub fn scan_contribution(w: &WeightDescriptor, n: usize, k: u64, budget: usize) -> Result<Real> {
    let k = BigUint::from(k);
    let tree = preimage_tree(&k, n, budget)?;
    Ok(w.ratio_sum(&tree, &k))
}

/// Maximizes the `n`-step contribution over `3 <= k <= k_max`; ties go to
/// the smallest `k`. The result is a lower bound for `‖𝒯ⁿ‖²`.
pub fn iterate_norm_scan(w: &WeightDescriptor, n: usize, k_max: u64, budget: usize) -> Result<IterateNormReport> {
    let best = (3..=k_max.max(3))
        .into_par_iter()
        .map(|k| scan_contribution(w, n, k, budget).map(|v| (k, v)))
        .try_reduce_with(|a, b| Ok(pick_max(a, b)))
        .expect("nonempty scan range")?;
    Ok(IterateNormReport {
        n,
        best_k: best.0,
        value: best.1,
        scan_bound: k_max,
        exactness: Exactness::LowerBound,
        exact_value: None,
    })
}

/// Larger value wins; equal values keep the smaller key.
pub(crate) fn pick_max<K: Ord>(a: (K, Real), b: (K, Real)) -> (K, Real) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Boundedness of `𝒯` on `𝒳_ω`, delegated to the weight's ratio suprema.
pub fn bounded_on(w: &WeightDescriptor, m_max: u64) -> (bool, BoundednessReport) {
    let report = w.boundedness_check(m_max);
    (report.bounded, report)
}
