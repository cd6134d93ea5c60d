//! The modified Collatz map `T(n) = n/2` (even) or `(3n+1)/2` (odd), its
//! orbits, preimage trees and the dyadic sequences used to chase
//! coefficients along the eigenvector rays.
//!
//! All integers are arbitrary precision: preimage trees reach `2^n k` and the
//! tracked lemma products grow without bound.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::biguint_json;

pub const DEFAULT_ORBIT_BUDGET: usize = 10_000;
pub const DEFAULT_TREE_BUDGET: usize = 1_000_000;

/// One step of the modified map.
pub fn t_step(n: &BigUint) -> BigUint {
    if n.is_even() {
        n >> 1u32
    } else {
        (n * 3u32 + 1u32) >> 1u32
    }
}

/// One step of the classical map `n/2` or `3n+1`.
pub fn t0_step(n: &BigUint) -> BigUint {
    if n.is_even() {
        n >> 1u32
    } else {
        n * 3u32 + 1u32
    }
}

pub fn t_iterate(n: &BigUint, steps: usize) -> BigUint {
    let mut x = n.clone();
    for _ in 0..steps {
        x = t_step(&x);
    }
    x
}

pub fn is_power_of_two(n: &BigUint) -> bool {
    n.count_ones() == 1
}

/// Whether `n` lies in `{2^i : i >= 2}`.
pub fn is_power_of_two_at_least_four(n: &BigUint) -> bool {
    is_power_of_two(n) && n.bits() >= 3
}

fn below_three(n: &BigUint) -> bool {
    n < &BigUint::from(3u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OrbitEnd {
    /// The orbit dropped below 3.
    QuotientDeath,
    /// The orbit revisited `orbit[first_seen]` without dying.
    Repeat { first_seen: usize },
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitReport {
    #[serde(with = "biguint_json")]
    pub start: BigUint,
    #[serde(with = "biguint_json::vec")]
    pub orbit: Vec<BigUint>,
    /// First `n` with `T^n(start) < 3`.
    pub quotient_death_time: Option<usize>,
    /// First `n` with `T^n(start)` a power of two.
    pub hit_power_of_two: Option<usize>,
    pub end: OrbitEnd,
}

impl OrbitReport {
    pub fn budget_exhausted(&self) -> bool {
        self.end == OrbitEnd::BudgetExhausted
    }
}

/// Iterates `T` from `k` until the value drops below 3, repeats, or `budget`
/// steps have been taken.
pub fn orbit(k: &BigUint, budget: usize) -> Result<OrbitReport> {
    if below_three(k) {
        return Err(Error::InvalidInput(format!("orbit start {k} must be >= 3")));
    }
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    let mut orbit = vec![k.clone()];
    let mut hit_power_of_two = is_power_of_two(k).then_some(0);
    seen.insert(k.clone(), 0);
    let mut end = OrbitEnd::BudgetExhausted;
    for step in 1..=budget {
        let next = t_step(orbit.last().expect("orbit is never empty"));
        if hit_power_of_two.is_none() && is_power_of_two(&next) {
            hit_power_of_two = Some(step);
        }
        let dead = below_three(&next);
        if let Some(&first_seen) = seen.get(&next) {
            orbit.push(next);
            end = OrbitEnd::Repeat { first_seen };
            break;
        }
        seen.insert(next.clone(), step);
        orbit.push(next);
        if dead {
            end = OrbitEnd::QuotientDeath;
            break;
        }
    }
    let quotient_death_time = (end == OrbitEnd::QuotientDeath).then(|| orbit.len() - 1);
    Ok(OrbitReport {
        start: k.clone(),
        orbit,
        quotient_death_time,
        hit_power_of_two,
        end,
    })
}

/// First `n` with `T^n(k) < 3`, without storing the orbit.
pub fn quotient_death_time(k: &BigUint, budget: usize) -> Result<usize> {
    let mut x = k.clone();
    for step in 0..=budget {
        if below_three(&x) {
            return Ok(step);
        }
        x = t_step(&x);
    }
    Err(Error::Budget {
        what: "orbit step",
        limit: budget as u64,
        reached: budget as u64,
    })
}

/// All `j >= 3` with `T(j) = k`, ascending.
pub fn preimages(k: &BigUint) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(2);
    if (k % 3u32) == BigUint::from(2u32) {
        let odd = ((k << 1u32) - 1u32) / 3u32;
        if !below_three(&odd) {
            out.push(odd);
        }
    }
    out.push(k << 1u32);
    out
}

/// `{ j >= 3 : T^n(j) = k }`, ascending. Intermediate iterates are automatically
/// `>= 3` since `{0, 1, 2}` is invariant under `T`.
pub fn preimage_tree(k: &BigUint, n: usize, budget: usize) -> Result<Vec<BigUint>> {
    if below_three(k) {
        return Err(Error::InvalidInput(format!("tree root {k} must be >= 3")));
    }
    let mut level = vec![k.clone()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * 2);
        for j in &level {
            next.extend(preimages(j));
            if next.len() > budget {
                return Err(Error::Budget {
                    what: "preimage tree node",
                    limit: budget as u64,
                    reached: next.len() as u64,
                });
            }
        }
        level = next;
    }
    level.sort();
    Ok(level)
}

/// Which coefficient relation the sequences are chasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaMode {
    /// Rays `(6m+4)2^p` against `(2m+1)2^p`, as for the orthogonal complement
    /// of the eigenvector span.
    Density,
    /// Rays `(3m+2)2^p` against `(2m+1)2^p`, as for eigenvectors of the adjoint.
    Adjoint,
}

/// Integer sequences `(m_n, p_n, j_n)` attached to a start `k` that is not a
/// power of two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaSequences {
    #[serde(with = "biguint_json")]
    pub k: BigUint,
    pub mode: LemmaMode,
    #[serde(with = "biguint_json::vec")]
    pub m_seq: Vec<BigUint>,
    pub p_seq: Vec<u64>,
    pub j_seq: Vec<u64>,
    /// Index (0-based) of the entry from which all three sequences are
    /// constant; `None` when `max_steps` was hit first.
    pub stationary_at: Option<usize>,
}

/// Splits `x = (2m+1) 2^p`.
fn odd_split(x: &BigUint) -> (BigUint, u64) {
    let p = x.trailing_zeros().unwrap_or(0);
    let odd = x >> p;
    ((odd - 1u32) >> 1u32, p)
}

/// Builds the sequences by the constructive recursion: `k = (2m_1+1)2^{p_1}`,
/// `j_1 = p_1 + 1`, and while `3m_n + 2` is not a power of two,
/// `3m_n + 2 = (2m_{n+1}+1)2^{q}` with `j_{n+1} = j_n + q + 1` and
/// `p_{n+1} = p_n + q + 1` (density) or `p_n + q` (adjoint).
pub fn lemma_sequences(k: &BigUint, mode: LemmaMode, max_steps: usize) -> Result<LemmaSequences> {
    if below_three(k) || is_power_of_two(k) {
        return Err(Error::InvalidInput(format!(
            "lemma sequences need k >= 3 not a power of two, got {k}"
        )));
    }
    if max_steps == 0 {
        return Err(Error::InvalidInput("max_steps must be positive".into()));
    }
    let (mut m, mut p) = odd_split(k);
    let mut j = p + 1;
    let mut out = LemmaSequences {
        k: k.clone(),
        mode,
        m_seq: Vec::new(),
        p_seq: Vec::new(),
        j_seq: Vec::new(),
        stationary_at: None,
    };
    loop {
        out.m_seq.push(m.clone());
        out.p_seq.push(p);
        out.j_seq.push(j);
        let head = &m * 3u32 + 2u32;
        if is_power_of_two_at_least_four(&head) {
            out.stationary_at = Some(out.m_seq.len() - 1);
            break;
        }
        if out.m_seq.len() >= max_steps {
            break;
        }
        let (m_next, q) = odd_split(&head);
        p += q + if mode == LemmaMode::Density { 1 } else { 0 };
        j += q + 1;
        m = m_next;
    }
    Ok(out)
}

impl LemmaSequences {
    pub fn len(&self) -> usize {
        self.m_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_seq.is_empty()
    }

    /// `(6m_n+4)2^{p_n}` in density mode, `(3m_n+2)2^{p_n}` in adjoint mode.
    pub fn tracked_product(&self, n: usize) -> BigUint {
        let base = match self.mode {
            LemmaMode::Density => &self.m_seq[n] * 6u32 + 4u32,
            LemmaMode::Adjoint => &self.m_seq[n] * 3u32 + 2u32,
        };
        base << self.p_seq[n]
    }

    /// `(2m_n+1)2^{p_n}`, the ray index the coefficient relation enters by.
    pub fn entry_index(&self, n: usize) -> BigUint {
        (&self.m_seq[n] * 2u32 + 1u32) << self.p_seq[n]
    }

    /// Checks the structural properties that do not need iterating `T`:
    /// `m_n >= 1`, the monotonicity split on `3m_n+2` being a power of two,
    /// strict growth of `j` and of the tracked product, and the linkage
    /// `entry_index(n+1) = tracked_product(n)`, `entry_index(0) = k`, which is
    /// what makes the coefficient chain hold.
    pub fn verify_structure(&self) -> std::result::Result<(), String> {
        if self.is_empty() {
            return Err("empty sequences".into());
        }
        if self.entry_index(0) != self.k {
            return Err("first entry does not decompose k".into());
        }
        for n in 0..self.len() {
            if self.m_seq[n].is_zero() {
                return Err(format!("m_{} = 0", n + 1));
            }
            let head = &self.m_seq[n] * 3u32 + 2u32;
            let stationary_here = is_power_of_two_at_least_four(&head);
            if n + 1 < self.len() {
                if stationary_here {
                    return Err(format!("sequence continues past stationary index {n}"));
                }
                if self.j_seq[n + 1] <= self.j_seq[n] {
                    return Err(format!("j not increasing at {n}"));
                }
                if self.tracked_product(n + 1) <= self.tracked_product(n) {
                    return Err(format!("tracked product not increasing at {n}"));
                }
                if self.entry_index(n + 1) != self.tracked_product(n) {
                    return Err(format!("linkage broken at {n}"));
                }
            } else if self.stationary_at == Some(n) && !stationary_here {
                return Err("declared stationary but 3m+2 is not a power of two".into());
            }
        }
        if let Some(s) = self.stationary_at {
            if s + 1 != self.len() {
                return Err("stationary index is not the last entry".into());
            }
        }
        Ok(())
    }
}

/// Convenience for small arguments.
pub fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

/// `u64` view when it fits.
pub fn small(n: &BigUint) -> Option<u64> {
    n.to_u64()
}
