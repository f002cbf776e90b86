mod common;

use condexp::prob::IndependenceConfig;
use condexp::spectral::{full_eigensolve, mgg_rotation, transition_matrix, Projection};
use condexp::walks::{
    check_lemma4, enumerate_walks, sample_walk, sample_walk_with, terminal_vector, verify_theorem4, HybridGraph, Walk,
};
use condexp::{Exact, Permutation, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn degrees_are_regular_up_to_4096_vertices() {
    for m in 1..=6 {
        let rot = mgg_rotation(m).unwrap();
        let n = rot.vertex_count();
        let g = HybridGraph::new(rot, Permutation::from_seed(n, m as u64)).unwrap();
        assert!(g.is_regular(), "m={m}");
    }
}

#[test]
fn marginals_are_uniform() {
    let g = common::gg_graph(2, 1);
    let t = 3;
    for i in 0..=t {
        for v in 0..16 {
            let mut family = vec![Projection::full(16); t + 1];
            family[i] = Projection::from_indices(16, [v]).unwrap();
            let p = terminal_vector::<Exact>(&g, t, &family).unwrap().total;
            assert_eq!(p, Exact::from_ratio(1, 16), "i={i}, v={v}");
        }
    }
}

#[test]
fn float_total_without_constraints() {
    let g = common::gg_graph(4, 2);
    let tv = terminal_vector::<f64>(&g, 10, &vec![Projection::full(256); 11]).unwrap();
    assert!((tv.total - 1.0).abs() <= 1e-12);
}

#[test]
fn endpoint_constraints_reduce_to_shorter_walks() {
    let g = common::gg_graph(2, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let inner: Vec<Projection> = (0..3).map(|_| Projection::random(16, &mut rng)).collect();
        let mut long = vec![Projection::full(16)];
        long.extend(inner.iter().cloned());
        long.push(Projection::full(16));
        let a = terminal_vector::<Exact>(&g, 4, &long).unwrap().total;
        let b = terminal_vector::<Exact>(&g, 2, &inner).unwrap().total;
        assert_eq!(a, b);
    }
}

#[test]
fn start_vertex_chi_square() {
    let g = common::gg_graph(2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let draws = 100_000;
    let mut counts = [0u64; 16];
    for _ in 0..draws {
        counts[sample_walk_with(&g, 0, &mut rng).start()] += 1;
    }
    let expected = draws as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 0.999 quantile of chi-square with 15 degrees of freedom.
    assert!(chi2 < 37.697, "chi2 = {chi2}");
}

#[test]
fn all_walk_extensions_are_uniform() {
    let g = common::gg_graph(2, 5);
    let all = enumerate_walks(&g, 2).unwrap();
    let r = check_lemma4::<Exact>(&g, 3, &all).unwrap();
    assert_eq!(r.prob_extended, Exact::from_ratio(1, 1));
    assert!(r.extended.iter().all(|v| *v == Exact::from_ratio(1, 16)));
    assert_eq!(r.max_abs_diff, 0.0);
}

#[test]
fn single_walk_mass() {
    let g = common::gg_graph(2, 6);
    let w = sample_walk(&g, 2, 9);
    let r = check_lemma4::<f64>(&g, 3, &[w.clone(), w]).unwrap();
    assert_eq!(r.prob_base, 1.0 / 1024.0);
    let mass: f64 = r.extended.iter().sum();
    assert!((mass - 1.0 / 1024.0).abs() < 1e-15);
}

#[test]
fn independence_on_larger_graph_sampled() {
    let g = common::gg_graph(3, 7);
    let beta = full_eigensolve::<f64>(&transition_matrix(g.rotation()), 1e-12).beta;
    let r = verify_theorem4(&g, 4, beta, &IndependenceConfig::sampled(2000, 7)).unwrap();
    assert!(r.holds(), "{r:?}");
    assert!(matches!(
        verify_theorem4(&g, 4, beta, &IndependenceConfig::exhaustive(0, 0)),
        Err(condexp::Error::Resource { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn terminal_vector_matches_enumeration(seed in 0u64..1000, masks in proptest::collection::vec(any::<u16>(), 4)) {
        let g = common::gg_graph(2, seed);
        let walks = common::all_walk_vertices(&g, 3);
        let sets: Vec<u64> = masks.iter().map(|&m| m as u64).collect();
        let family: Vec<Projection> = sets.iter().map(|&m| Projection::from_mask(16, m)).collect();
        let tv = terminal_vector::<f64>(&g, 3, &family).unwrap();
        prop_assert!((tv.total - common::enumerated_probability(&walks, &sets)).abs() <= 1e-12);
    }

    #[test]
    fn walk_text_round_trip(seed in any::<u64>(), t in 0usize..6) {
        let g = common::gg_graph(3, 1);
        let w = sample_walk(&g, t, seed);
        let back: Walk = w.to_string().parse().unwrap();
        prop_assert!(g.is_walk(&back));
        prop_assert_eq!(back, w);
    }
}
