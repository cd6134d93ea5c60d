use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use proptest::prelude::*;

use collatz_transfer::collatz::{
    lemma_sequences, orbit, preimage_tree, preimages, quotient_death_time, t_iterate, t_step, LemmaMode,
};
use collatz_transfer::eigen::{
    adjoint_eigen_check, membership, periodic_point, span_residual, verify_eigenrelation, verify_periodic, EigenSpec,
};
use collatz_transfer::exact_norm::{exact_iterate_norm_sq, DEFAULT_N_MAX};
use collatz_transfer::num::{int, qc, ratio, Cplx, QComplex, Real};
use collatz_transfer::transfer::{
    apply_adjoint, apply_t, apply_t_power, doubling_inverse_s, doubling_inverse_s_power, scan_contribution,
};
use collatz_transfer::weights::{affine_ratio_nondecreasing, affine_ratio_sup, Attainment};
use collatz_transfer::{AnyVec, CoeffVec, WeightDescriptor};

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn qcomplex() -> impl Strategy<Value = QComplex> {
    (-30i64..=30, 1i64..=12, -30i64..=30, 1i64..=12).prop_map(|(a, b, c, d)| qc(ratio(a, b), ratio(c, d)))
}

fn qvec(max_deg: u64) -> impl Strategy<Value = CoeffVec<QComplex>> {
    prop::collection::vec((3..=max_deg, qcomplex()), 0..8)
        .prop_map(|ts| CoeffVec::from_terms(ts).expect("degrees >= 3"))
}

fn exact_weights() -> Vec<WeightDescriptor> {
    vec![
        WeightDescriptor::classic(),
        WeightDescriptor::constant(ratio(5, 3)).unwrap(),
        WeightDescriptor::power_law(int(2), int(1)).unwrap(),
        WeightDescriptor::power_law(ratio(1, 2), int(3)).unwrap(),
        WeightDescriptor::power_law(int(1), int(-1)).unwrap(),
        WeightDescriptor::tabulated(vec![int(1), int(1), int(1), int(2), int(5), int(3), int(8)], int(1), int(1)).unwrap(),
    ]
}

fn brute_t(mut x: u64, n: usize) -> u64 {
    for _ in 0..n {
        x = if x % 2 == 0 { x / 2 } else { (3 * x + 1) / 2 };
    }
    x
}

#[test]
fn trees_match_brute_force_search() {
    const M: u64 = 1_000_000;
    for n in 0..=6usize {
        let mut buckets: BTreeMap<u64, Vec<BigUint>> = BTreeMap::new();
        for j in 3..=M {
            let t = brute_t(j, n);
            if (3..=200).contains(&t) {
                buckets.entry(t).or_default().push(big(j));
            }
        }
        for k in 3..=200u64 {
            let tree = preimage_tree(&big(k), n, 1 << 16).unwrap();
            assert_eq!(&tree, buckets.get(&k).unwrap_or(&Vec::new()), "k={k} n={n}");
        }
    }
}

#[test]
fn classic_first_sequence_stays_below_two() {
    let w = WeightDescriptor::classic();
    let two = Real::from_int(2);
    for m in 1..=1_000_000u64 {
        assert!(w.sequence_term(0, m) < two, "m={m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn preimages_are_exactly_the_t_fibre(k in 3u64..=10_000) {
        let brute: Vec<BigUint> = (3..=2 * k).filter(|&j| brute_t(j, 1) == k).map(big).collect();
        prop_assert_eq!(preimages(&big(k)), brute);
    }

    #[test]
    fn lemma_properties(k in 3u64..=1_000_000_000_000, density in any::<bool>()) {
        prop_assume!(!k.is_power_of_two());
        let mode = if density { LemmaMode::Density } else { LemmaMode::Adjoint };
        let s = lemma_sequences(&big(k), mode, 100_000).unwrap();
        prop_assert!(s.verify_structure().is_ok());
        let last = s.stationary_at.expect("every tested start reaches a power of two");
        prop_assert_eq!(last + 1, s.len());
        for n in 0..s.len() {
            prop_assert!(!s.m_seq[n].is_zero());
            let head = &s.m_seq[n] * 3u32 + 2u32;
            prop_assert_eq!(&head, &t_iterate(&big(k), s.j_seq[n] as usize));
            let pow2 = head.count_ones() == 1 && head >= big(4);
            prop_assert_eq!(pow2, n == last);
        }
    }

    #[test]
    fn orbit_death_is_consistent(k in 3u64..=5_000_000) {
        let r = orbit(&big(k), 10_000).unwrap();
        let d = quotient_death_time(&big(k), 10_000).unwrap();
        prop_assert_eq!(r.quotient_death_time, Some(d));
        prop_assert!(t_iterate(&big(k), d) < big(3));
        prop_assert!(t_iterate(&big(k), d - 1) >= big(3));
        prop_assert_eq!(r.orbit.len(), d + 1);
        for pair in r.orbit.windows(2) {
            prop_assert_eq!(t_step(&pair[0]), pair[1].clone());
        }
    }

    #[test]
    fn monotone_ratio_rule(a in 1i64..=60, b in 1i64..=60, c in 1i64..=60, d in 1i64..=60) {
        let f = |m: i64| ratio(a * m + b, c * m + d);
        let rule = affine_ratio_nondecreasing(&BigInt::from(a), &BigInt::from(b), &BigInt::from(c), &BigInt::from(d));
        let observed = (1..=60).all(|m| f(m + 1) >= f(m));
        prop_assert_eq!(rule, observed);
        let sup = affine_ratio_sup(a, b, c, d);
        for m in 1..=200 {
            prop_assert!(Real::Exact(f(m)) <= sup.value);
        }
        match sup.attained {
            Attainment::AtIndex(1) => prop_assert_eq!(sup.value, Real::Exact(f(1))),
            Attainment::Limit => prop_assert_eq!(sup.value, Real::Exact(ratio(a, c))),
            other => prop_assert!(false, "unexpected attainment {:?}", other),
        }
    }

    #[test]
    fn sequences_respect_analytic_suprema(m in 1u64..=10_000, wi in 0usize..6) {
        let w = &exact_weights()[wi];
        let rep = w.boundedness_check(4);
        for (idx, s) in rep.sequences.iter().enumerate() {
            let sup = s.analytic.as_ref().expect("analytic supremum");
            prop_assert!(w.sequence_term(idx, m) <= sup.value, "{} idx {} m {}", w, idx, m);
        }
    }

    #[test]
    fn cauchy_schwarz_and_parallelogram(f in qvec(300), g in qvec(300), wi in 0usize..6) {
        let w = &exact_weights()[wi];
        let ip = f.inner(&g, w);
        let (nf, ng) = (f.norm_sq(w), g.norm_sq(w));
        prop_assert!(ip.coeff.norm_sqr() <= nf.coeff.clone() * ng.coeff.clone());
        let lhs = f.add(&g).norm_sq(w).coeff + f.sub(&g).norm_sq(w).coeff;
        let rhs = (nf.coeff + ng.coeff) * Real::from_int(2);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn adjoint_identity_exact(f in qvec(500), g in qvec(500), wi in 0usize..6) {
        let w = &exact_weights()[wi];
        let g = g.add(&apply_t(&f));
        let lhs = apply_t(&f).inner(&g, w);
        let rhs = f.inner(&apply_adjoint(&g, w).unwrap(), w);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn adjoint_identity_fractional_exponent(f in qvec(500), g in qvec(500)) {
        let w = WeightDescriptor::power_law(int(1), ratio(1, 2)).unwrap();
        let (f, g) = (f.to_float(), g.add(&apply_t(&f)).to_float());
        let lhs = apply_t(&f).inner(&g, &w).to_c64();
        let rhs = f.inner(&apply_adjoint(&g, &w).unwrap(), &w).to_c64();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn operator_algebra(f in qvec(2000), g in qvec(2000), lambda in qcomplex(), a in 0usize..12, b in 0usize..12) {
        prop_assert_eq!(apply_t(&doubling_inverse_s(&f)), f.clone());
        prop_assert_eq!(apply_t_power(&doubling_inverse_s_power(&f, a), a), f.clone());
        prop_assert_eq!(apply_t(&f.add(&g.scale(&lambda))), apply_t(&f).add(&apply_t(&g).scale(&lambda)));
        prop_assert_eq!(apply_t_power(&f, a + b), apply_t_power(&apply_t_power(&f, a), b));
    }

    #[test]
    fn scan_never_exceeds_exact_norm(k in 3u64..=1_000_000, n in 1usize..=3) {
        let exact = exact_iterate_norm_sq(n, DEFAULT_N_MAX).unwrap().value;
        let v = scan_contribution(&WeightDescriptor::classic(), n, k, 1 << 10).unwrap();
        prop_assert!(v < exact);
    }

    #[test]
    fn eigenrelation_for_any_rational_mu(m in 0u64..=20, mu in qcomplex(), cap_exp in 6u32..=14) {
        let c = verify_eigenrelation(&EigenSpec::exact(m, mu, 1 << cap_exp)).unwrap();
        prop_assert!(c.is_zero());
    }

    #[test]
    fn membership_matches_dyadic_exponent(p in 0i64..=400, q in 1i64..=100) {
        let mu_sq = Real::Exact(ratio(p, q));
        prop_assert_eq!(membership(0, &mu_sq, &WeightDescriptor::classic()), ratio(p, q) < int(2));
        let quad = WeightDescriptor::power_law(int(1), int(2)).unwrap();
        prop_assert_eq!(membership(3, &mu_sq, &quad), ratio(p, q) < int(4));
        let flat = WeightDescriptor::constant(int(1)).unwrap();
        prop_assert_eq!(membership(3, &mu_sq, &flat), ratio(p, q) < int(1));
    }

    #[test]
    fn periodic_points_return_at_their_order(m in 0u64..=6, p in 1i64..=15, q in 1i64..=8) {
        let alpha = ratio(p, q);
        let pt = periodic_point(m, &alpha, 1 << 26);
        let c = verify_periodic(&pt).unwrap();
        prop_assert!(c.returns_at_period);
        prop_assert_eq!(c.first_return, Some(c.period));
        // Smallest t with tα an even integer.
        let order = (1..=2 * q as u64).find(|t| (ratio(p, q) * int(*t as i64) / int(2)).is_integer()).unwrap();
        prop_assert_eq!(c.period, order);
    }

    #[test]
    fn adjoint_has_no_finite_eigenvectors(f in qvec(400), mu in qcomplex(), wi in 0usize..6) {
        prop_assume!(!f.is_empty());
        let w = &exact_weights()[wi];
        let c = adjoint_eigen_check(&f, &mu, w).unwrap();
        prop_assert!(!c.equal);
        let top = f.max_degree().unwrap() << 1u32;
        prop_assert_eq!(c.witness_degree, Some(top.to_string()));
    }

    #[test]
    fn json_roundtrips(f in qvec(10_000), wi in 0usize..6) {
        prop_assert_eq!(CoeffVec::<QComplex>::from_json(&f.to_json()).unwrap(), f.clone());
        let any = AnyVec::Float(f.to_float());
        prop_assert_eq!(AnyVec::from_json(&any.to_json()).unwrap(), any);
        let w = &exact_weights()[wi];
        prop_assert_eq!(&WeightDescriptor::from_json(&w.to_json()).unwrap(), w);
    }
}

#[test]
fn span_residual_shrinks_as_the_family_grows() {
    let w = WeightDescriptor::classic();
    let mus = [qc(ratio(1, 2), int(0)), qc(ratio(-1, 2), int(0)), qc(int(0), ratio(1, 2)), qc(ratio(3, 5), ratio(4, 5))];
    let mut family = Vec::new();
    for m in 0..=3u64 {
        for mu in &mus {
            family.push(EigenSpec::exact(m, mu.clone(), 1 << 12));
        }
    }
    for k in [3u64, 4, 5, 6, 8, 10, 12] {
        let mut prev = f64::INFINITY;
        for len in 1..=family.len() {
            let r = match span_residual(k, &family[..len], &w) {
                Ok(r) => r,
                Err(_) => break,
            };
            assert!(r.residual_sq >= 0.0 && r.residual_sq <= r.target_norm_sq + 1e-12);
            assert!(r.residual_sq <= prev + 1e-9, "k={k} len={len}: {} > {prev}", r.residual_sq);
            prev = r.residual_sq;
        }
    }
}

#[test]
fn complex_pairing_is_sesquilinear() {
    let w = WeightDescriptor::classic();
    let f = CoeffVec::from_terms([(3, qc(int(1), int(2))), (9, qc(int(0), int(-1)))]).unwrap();
    let g = CoeffVec::from_terms([(3, qc(int(2), int(0))), (9, qc(int(1), int(1)))]).unwrap();
    let i = qc(int(0), int(1));
    let a = f.scale(&i).inner(&g, &w).coeff;
    let b = f.inner(&g, &w).coeff;
    match (a, b) {
        (Cplx::Exact(a), Cplx::Exact(b)) => assert_eq!(a, b * i),
        _ => panic!("exact pairing expected"),
    }
}
