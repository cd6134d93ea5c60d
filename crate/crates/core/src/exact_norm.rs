//! Exact `‖𝒯ⁿ‖²` for the classic weight through affine preimage polynomials.
//!
//! Each residue class `3ⁿm + r` has an `n`-step preimage set parametrized by
//! affine polynomials `aξ + b`, built from `{3ⁿξ + r}` by `P ↦ 2P` and, when
//! `P(0) ≡ 2 (mod 3)`, `P ↦ (2P − 1)/3`. The contribution of the class is
//! `Σ (a m + b + 1)/(3ⁿ m + r + 1)`, nondecreasing in `m` as soon as
//! `a(r+1) >= 3ⁿ(b+1)`, so its supremum is the limit `Σ a / 3ⁿ`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{biguint_json, format_rational, rational_to_f64, Real};
use crate::transfer::{iterate_norm_scan, Exactness, IterateNormReport};
use crate::weights::WeightDescriptor;

/// Default cap on `n`.
pub const DEFAULT_N_MAX: usize = 10;

/// `aξ + b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AffinePoly {
    #[serde(with = "biguint_json")]
    pub a: BigUint,
    #[serde(with = "biguint_json")]
    pub b: BigUint,
}

impl AffinePoly {
    pub fn new(a: u64, b: u64) -> Self {
        AffinePoly {
            a: BigUint::from(a),
            b: BigUint::from(b),
        }
    }

    pub fn eval(&self, m: &BigUint) -> BigUint {
        &self.a * m + &self.b
    }

    fn doubled(&self) -> Self {
        AffinePoly {
            a: &self.a << 1u32,
            b: &self.b << 1u32,
        }
    }

    /// `(2P − 1)/3` when it has integer coefficients.
    fn odd_branch(&self) -> Option<Self> {
        let three = BigUint::from(3u32);
        if !(&self.b % &three == BigUint::from(2u32)) {
            return None;
        }
        let a2 = &self.a << 1u32;
        let b2 = (&self.b << 1u32) - 1u32;
        let (qa, ra) = a2.div_rem(&three);
        let (qb, rb) = b2.div_rem(&three);
        (ra.is_zero() && rb.is_zero()).then_some(AffinePoly { a: qa, b: qb })
    }
}

impl fmt::Display for AffinePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ξ+{}", self.a, self.b)
    }
}

/// `P⁽ⁿ⁾ₙ,ᵣ` with bookkeeping from its construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreimagePolySet {
    pub n: usize,
    #[serde(with = "biguint_json")]
    pub r: BigUint,
    /// Sorted by `(a, b)`.
    pub polys: Vec<AffinePoly>,
    /// Polynomials produced more than once during the recursion.
    pub duplicates: usize,
}

impl PreimagePolySet {
    /// `Σ a`.
    pub fn leading_sum(&self) -> BigUint {
        self.polys.iter().map(|p| &p.a).sum()
    }
}

fn three_pow(n: usize) -> BigUint {
    BigUint::from(3u32).pow(n as u32)
}

/// Builds `P⁽ⁿ⁾ₙ,ᵣ`, asserting integrality, the odd-branch divisibility and
/// the monotonicity certificate `a(r+1) >= 3ⁿ(b+1)` as it goes.
pub fn preimage_poly_set(n: usize, r: &BigUint) -> Result<PreimagePolySet> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let modulus = three_pow(n);
    if r >= &modulus {
        return Err(Error::InvalidInput(format!("residue {r} outside [0, 3^{n})")));
    }
    let mut level: BTreeMap<AffinePoly, usize> = BTreeMap::new();
    level.insert(
        AffinePoly {
            a: modulus.clone(),
            b: r.clone(),
        },
        1,
    );
    let mut duplicates = 0usize;
    for _ in 0..n {
        let mut next: BTreeMap<AffinePoly, usize> = BTreeMap::new();
        for p in level.keys() {
            let mut push = |q: AffinePoly| {
                let slot = next.entry(q).or_insert(0);
                *slot += 1;
                if *slot > 1 {
                    duplicates += 1;
                }
            };
            push(p.doubled());
            if &p.b % 3u32 == BigUint::from(2u32) {
                match p.odd_branch() {
                    Some(q) => push(q),
                    None => {
                        return Err(Error::Certificate(format!(
                            "odd branch of {p} is not integral (3 must divide the leading coefficient)"
                        )))
                    }
                }
            }
        }
        level = next;
    }
    let r1 = r + 1u32;
    for p in level.keys() {
        if &p.a * &r1 < &modulus * (&p.b + 1u32) {
            return Err(Error::Certificate(format!(
                "monotonicity fails for {p} at residue {r}: a(r+1) < 3^{n}(b+1)"
            )));
        }
    }
    Ok(PreimagePolySet {
        n,
        r: r.clone(),
        polys: level.into_keys().collect(),
        duplicates,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactNorm {
    pub n: usize,
    /// `‖𝒯ⁿ‖²` under `ω₀`.
    pub value: Real,
    /// Smallest maximizing residue.
    pub best_r: u64,
    pub polys_total: u64,
    pub duplicates: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorkEstimate {
    pub residues: u64,
    /// `3ⁿ · 2ⁿ`, the worst case over all residues.
    pub max_polys: u64,
    /// Peak bytes if one residue per thread holds its widest level.
    pub peak_bytes: u64,
}

/// Rough size of the computation for `n`.
pub fn work_estimate(n: usize) -> WorkEstimate {
    let residues = 3u64.saturating_pow(n as u32);
    let per_residue = 1u64 << n.min(63);
    let threads = rayon::current_num_threads() as u64;
    // Two BigUints of a few limbs plus map overhead per polynomial.
    let bytes_per_poly = 160u64;
    WorkEstimate {
        residues,
        max_polys: residues.saturating_mul(per_residue),
        peak_bytes: threads.saturating_mul(2 * per_residue * bytes_per_poly),
    }
}

/// `‖𝒯ⁿ‖² = max_r Σ_{aξ+b ∈ P⁽ⁿ⁾ₙ,ᵣ} a / 3ⁿ` for `ω₀`. Residues run in
/// parallel; the reduction is deterministic (ties keep the smaller `r`).
pub fn exact_iterate_norm_sq(n: usize, n_max: usize) -> Result<ExactNorm> {
    if n > n_max {
        return Err(Error::Budget {
            what: "exact norm n",
            limit: n_max as u64,
            reached: n as u64,
        });
    }
    let modulus = 3u64
        .checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidInput(format!("n = {n} too large")))?;
    let per_residue: Vec<(u64, BigUint, u64, u64)> = (0..modulus)
        .into_par_iter()
        .map(|r| {
            let set = preimage_poly_set(n, &BigUint::from(r))?;
            Ok((r, set.leading_sum(), set.polys.len() as u64, set.duplicates as u64))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(u64, &BigUint)> = None;
    for (r, sum, _, _) in &per_residue {
        if best.is_none_or(|(_, s)| sum > s) {
            best = Some((*r, sum));
        }
    }
    let (best_r, sum) = best.expect("at least one residue");
    Ok(ExactNorm {
        n,
        value: Real::Exact(BigRational::new(BigInt::from(sum.clone()), BigInt::from(three_pow(n)))),
        best_r,
        polys_total: per_residue.iter().map(|t| t.2).sum(),
        duplicates: per_residue.iter().map(|t| t.3).sum(),
    })
}

/// Runs the preimage scan and, for `ω₀`, attaches the exact supremum after
/// checking that the scanned value does not exceed it.
pub fn certified_iterate_norm(
    w: &WeightDescriptor,
    n: usize,
    k_max: u64,
    tree_budget: usize,
    n_max: usize,
) -> Result<IterateNormReport> {
    let mut report = iterate_norm_scan(w, n, k_max, tree_budget)?;
    if *w == WeightDescriptor::ClassicBergman {
        let exact = exact_iterate_norm_sq(n, n_max)?;
        if report.value > exact.value {
            return Err(Error::Certificate(format!(
                "scanned value {} exceeds exact supremum {}",
                report.value, exact.value
            )));
        }
        report.exactness = Exactness::ExactLimit;
        report.exact_value = Some(exact.value);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralRow {
    pub n: usize,
    pub norm_sq: Real,
    /// `‖𝒯ⁿ‖^{1/n}`, an upper bound on the spectral radius.
    pub upper_bound: f64,
    pub best_r: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralBoundTable {
    pub rows: Vec<SpectralRow>,
    /// `√2`: every `|μ| < √2` is an eigenvalue.
    pub lower_bound: f64,
    /// `‖𝒯ⁿ‖² >= 2ⁿ` for every row, checked exactly.
    pub lower_bound_respected: bool,
    /// `‖𝒯^{a+b}‖² <= ‖𝒯^a‖² ‖𝒯^b‖²` for all rows, checked exactly.
    pub submultiplicative: bool,
}

impl SpectralBoundTable {
    /// Rows as `[n, norm_sq, upper_bound, lower_bound]` strings.
    pub fn csv_records(&self) -> Vec<[String; 4]> {
        self.rows
            .iter()
            .map(|row| {
                [
                    row.n.to_string(),
                    row.norm_sq.to_string(),
                    format!("{:.12}", row.upper_bound),
                    format!("{:.12}", self.lower_bound),
                ]
            })
            .collect()
    }
}

pub const CSV_HEADER: [&str; 4] = ["n", "norm_sq", "upper_bound", "lower_bound"];

pub fn spectral_radius_table(n_max: usize, budget_n: usize) -> Result<SpectralBoundTable> {
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let e = exact_iterate_norm_sq(n, budget_n)?;
        let q = e.value.as_exact().expect("exact").clone();
        rows.push(SpectralRow {
            n,
            upper_bound: rational_to_f64(&q).powf(1.0 / (2.0 * n as f64)),
            norm_sq: e.value,
            best_r: e.best_r,
        });
    }
    let exact: Vec<&BigRational> = rows.iter().map(|r| r.norm_sq.as_exact().expect("exact")).collect();
    let lower_bound_respected = exact
        .iter()
        .enumerate()
        .all(|(i, q)| **q >= BigRational::from_integer(BigInt::from(2).pow(i as u32 + 1)));
    let mut submultiplicative = true;
    for a in 1..=n_max {
        for b in 1..=n_max - a {
            if exact[a + b - 1] > &(exact[a - 1] * exact[b - 1]) {
                submultiplicative = false;
            }
        }
    }
    Ok(SpectralBoundTable {
        rows,
        lower_bound: std::f64::consts::SQRT_2,
        lower_bound_respected,
        submultiplicative,
    })
}

impl fmt::Display for ExactNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Real::Exact(q) => f.write_str(&format_rational(q)),
            other => write!(f, "{other}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collatz::{preimage_tree, t_iterate};
    use crate::num::ratio;
    use num_traits::One;

    /// Largest `v` with `3^v | x`.
    fn three_adic_valuation(x: &BigUint) -> u32 {
        let three = BigUint::from(3u32);
        let mut v = 0;
        let mut y = x.clone();
        while !y.is_zero() && (&y % &three).is_zero() {
            y /= &three;
            v += 1;
        }
        v
    }

    fn is_power_of_three(x: &BigUint) -> bool {
        let v = three_adic_valuation(x);
        *x == BigUint::from(3u32).pow(v)
    }

    fn set(n: usize, r: u64) -> Vec<AffinePoly> {
        preimage_poly_set(n, &BigUint::from(r)).unwrap().polys
    }

    #[test]
    fn poly_set_examples() {
        assert_eq!(set(1, 2), vec![AffinePoly::new(2, 1), AffinePoly::new(6, 4)]);
        assert_eq!(set(1, 0), vec![AffinePoly::new(6, 0)]);
        assert_eq!(
            set(2, 8),
            vec![AffinePoly::new(4, 3), AffinePoly::new(12, 10), AffinePoly::new(36, 32)]
        );
        assert!(preimage_poly_set(2, &BigUint::from(9u32)).is_err());
    }

    #[test]
    fn exact_norm_values() {
        let cases = [
            (1, ratio(8, 3), 2),
            (2, ratio(52, 9), 8),
            (3, ratio(392, 27), 26),
            (4, ratio(2512, 81), 80),
            (5, ratio(6272, 81), 20),
        ];
        for (n, v, r) in cases {
            let e = exact_iterate_norm_sq(n, DEFAULT_N_MAX).unwrap();
            assert_eq!(e.value, Real::Exact(v), "n = {n}");
            assert_eq!(e.best_r, r);
            assert_eq!(e.duplicates, 0);
        }
    }

    #[test]
    fn n3_bracket() {
        let v3 = exact_iterate_norm_sq(3, DEFAULT_N_MAX).unwrap().value;
        assert!(v3 >= Real::from_int(8));
        assert!(v3 <= Real::Exact(ratio(8, 3) * ratio(52, 9)));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(exact_iterate_norm_sq(4, 3), Err(Error::Budget { .. })));
    }

    #[test]
    fn leading_coefficients_have_expected_shape() {
        // a = 2ⁿ · 3^{n - odd branches}.
        for n in 1..=4usize {
            for r in 0..3u64.pow(n as u32) {
                for p in set(n, r) {
                    let (q, rem) = p.a.div_rem(&(BigUint::one() << n));
                    assert!(rem.is_zero());
                    assert!(is_power_of_three(&q));
                    assert!(three_adic_valuation(&q) as usize <= n);
                }
            }
        }
    }

    #[test]
    fn polys_land_on_their_residue_class() {
        for n in 1..=3usize {
            let m3 = 3u64.pow(n as u32);
            for r in 0..m3 {
                let delta = u64::from(r <= 2);
                for p in set(n, r) {
                    for m in delta..delta + 20 {
                        let j = p.eval(&BigUint::from(m));
                        assert_eq!(t_iterate(&j, n), BigUint::from(m3 * m + r), "{p} at m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn polys_match_preimage_trees() {
        for n in 1..=2usize {
            let m3 = 3u64.pow(n as u32);
            for r in 0..m3 {
                let polys = set(n, r);
                for m in 0..=50u64 {
                    let k = m3 * m + r;
                    if k < 3 {
                        continue;
                    }
                    let mut from_polys: Vec<BigUint> = polys
                        .iter()
                        .map(|p| p.eval(&BigUint::from(m)))
                        .filter(|j| {
                            (0..n).all(|i| t_iterate(j, i) >= BigUint::from(3u32))
                        })
                        .collect();
                    from_polys.sort();
                    let tree = preimage_tree(&BigUint::from(k), n, 1 << 20).unwrap();
                    assert_eq!(from_polys, tree, "n={n} r={r} m={m}");
                }
            }
        }
    }

    #[test]
    fn certified_scan_attaches_exact_value() {
        let w = WeightDescriptor::classic();
        let rep = certified_iterate_norm(&w, 1, 200, 1000, DEFAULT_N_MAX).unwrap();
        assert_eq!(rep.exactness, Exactness::ExactLimit);
        assert_eq!(rep.exact_value, Some(Real::Exact(ratio(8, 3))));
        let c = WeightDescriptor::constant(crate::num::int(1)).unwrap();
        let rep = certified_iterate_norm(&c, 1, 200, 1000, DEFAULT_N_MAX).unwrap();
        assert_eq!(rep.exactness, Exactness::LowerBound);
    }

    #[test]
    fn small_table() {
        let t = spectral_radius_table(4, DEFAULT_N_MAX).unwrap();
        assert!(t.lower_bound_respected && t.submultiplicative);
        assert!((t.rows[0].upper_bound - 1.632993161855).abs() < 1e-11);
        assert!((t.rows[1].upper_bound - 1.550387).abs() < 1e-6);
        let csv = t.csv_records();
        assert_eq!(csv[0][1], "8/3");
        assert_eq!(csv[0][3], "1.414213562373");
    }

    #[test]
    fn work_estimate_grows() {
        let e = work_estimate(8);
        assert_eq!(e.residues, 6561);
        assert_eq!(e.max_polys, 6561 * 256);
    }
}
