mod common;

use std::sync::Arc;

use condexp::prob::{
    check_independence, conditional_expectation, eval_bound_thm1, eval_bound_thm2, expectation, tail_probability, FiniteSpace,
    IndependenceConfig, RandomObject, RandomVariable,
};
use condexp::{Exact, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn cube_quarter_two_coordinates() {
    let (z, us) = common::cube_instance(Exact::from_ratio(1, 2), 2);
    assert_eq!(expectation(&z), Exact::from_ratio(1, 4));
    let w = conditional_expectation(&z, &us[0]).unwrap();
    assert_eq!(w.values(), &[Exact::from_ratio(1, 2), Exact::from_ratio(0, 1)]);
    let r = eval_bound_thm1(&z, &us, Exact::from_ratio(1, 10), Exact::from_ratio(1, 1)).unwrap();
    assert_eq!(r.tail_terms[0], Exact::from_ratio(1, 2));
    assert_eq!(r.bound_value, Exact::from_ratio(45, 100));
    assert!(r.holds);
}

#[test]
fn correlated_copies_are_caught() {
    let s = Arc::new(FiniteSpace::<f64>::uniform(2).unwrap());
    let u = RandomObject::new(Arc::clone(&s), 2, vec![0, 1]).unwrap();
    let report = check_independence(&[u.clone(), u], &1.0, &IndependenceConfig::exhaustive(0, 0)).unwrap();
    assert!(!report.holds());
    assert!((report.worst_ratio - 2.0).abs() < 1e-12);
    assert_eq!(report.witnesses[0].sets, vec![vec![0], vec![0]]);
}

#[test]
fn product_projections_are_independent() {
    let mut r = rng(3);
    for _ in 0..50 {
        let (_, us) = common::iid_instance(&mut r, 3, 3);
        let report = check_independence(&us, &1.0, &IndependenceConfig::sampled(200, 1)).unwrap();
        assert!(report.holds(), "{report:?}");
    }
    let law = FiniteSpace::new(vec![0.2, 0.3, 0.5]).unwrap();
    let (_, us) = FiniteSpace::product(&[&law, &law, &law]).unwrap();
    let report = check_independence(&us, &1.0, &IndependenceConfig::exhaustive(100, 2)).unwrap();
    assert!(report.holds());
    assert!((report.worst_ratio - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn iterated_expectation(seed in any::<u64>(), t in 1usize..4, k in 2usize..5) {
        let (z, us) = common::iid_instance(&mut rng(seed), t, k);
        let ez = expectation(&z);
        for u in &us {
            let w = conditional_expectation(&z, u).unwrap();
            prop_assert!((expectation(&w) - ez).abs() < 1e-12);
            prop_assert!(w.values().iter().all(|&v| (-1e-15..=1.0 + 1e-12).contains(&v)));
        }
    }

    #[test]
    fn tail_is_non_increasing(seed in any::<u64>(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (z, us) = common::iid_instance(&mut rng(seed), 2, 3);
        let w = conditional_expectation(&z, &us[0]).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(tail_probability(&w, &lo) >= tail_probability(&w, &hi));
    }

    #[test]
    fn independent_bounds_hold_for_every_beta(seed in any::<u64>(), t in 2usize..5, eps in 0.01f64..0.99, beta in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let (z, us) = common::iid_instance(&mut r, t, 3);
        prop_assert!(eval_bound_thm1(&z, &us, eps, beta).unwrap().holds);
        let (z, us) = common::mixed_instance(&mut r, t);
        prop_assert!(eval_bound_thm2(&z, &us, &vec![eps; t], beta).unwrap().holds);
    }

    #[test]
    fn exact_bounds_hold(num in proptest::collection::vec(0u64..=16, 16), q in 1u64..16, e in 1u64..16) {
        let coord = FiniteSpace::new(vec![Exact::from_ratio(q, 16), Exact::from_ratio(16 - q, 16)]).unwrap();
        let (space, us) = FiniteSpace::product(&[&coord, &coord, &coord, &coord]).unwrap();
        let z = RandomVariable::new(space, num.iter().map(|&n| Exact::from_ratio(n, 16)).collect()).unwrap();
        let r = eval_bound_thm1(&z, &us, Exact::from_ratio(e, 16), Exact::from_ratio(1, 1)).unwrap();
        prop_assert!(r.slack >= Exact::from_ratio(0, 1));
    }

    #[test]
    fn thm2_matches_thm1_on_symmetric_instances(seed in any::<u64>(), t in 2usize..5, eps in 0.01f64..0.99) {
        let (z, us) = common::symmetric_instance(&mut rng(seed), t, 3);
        let a = eval_bound_thm1(&z, &us, eps, 0.6).unwrap();
        let b = eval_bound_thm2(&z, &us, &vec![eps; t], 0.6).unwrap();
        prop_assert_eq!(a.bound_value.to_bits(), b.bound_value.to_bits());
    }
}
