#![allow(dead_code)]

use std::sync::Arc;

use condexp::owf::{walk_layout, WalkRepr};
use condexp::prob::{FiniteSpace, RandomObject, RandomVariable};
use condexp::spectral::mgg_rotation;
use condexp::walks::{HybridGraph, Walk};
use condexp::{Permutation, Scalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn gg_graph(m: u32, seed: u64) -> HybridGraph {
    let rot = mgg_rotation(m).unwrap();
    let n = rot.vertex_count();
    HybridGraph::new(rot, Permutation::from_seed(n, seed)).unwrap()
}

/// `rho^{-1}`, walking backwards with `F^{-1}` read off the table.
pub fn reverse_inv(g: &HybridGraph, r: WalkRepr) -> Walk {
    let (n, e) = walk_layout(g).unwrap();
    let t = (r.len() - n) / e;
    let mut w = (r.bits() >> (e * t)) as usize;
    let mut labels = Vec::new();
    for s in 0..t {
        let k = (r.bits() >> (e * (t - 1 - s)) & ((1 << e) - 1)) as usize;
        let v = g.permutation().invert(w);
        let (u, j) = g.rotation().rotate(v, k);
        labels.push(j);
        w = u;
    }
    labels.reverse();
    g.walk_from_labels(w, labels).unwrap()
}

/// Every `t`-walk as its vertex list, by nested label loops.
pub fn all_walk_vertices(g: &HybridGraph, t: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..g.vertex_count()).map(|v| vec![v]).collect();
    for _ in 0..t {
        let mut next = Vec::with_capacity(out.len() * g.degree());
        for w in &out {
            let last = *w.last().unwrap();
            for j in 0..g.degree() {
                let mut ext = w.clone();
                ext.push(g.permutation().apply(g.rotation().neighbor(last, j)));
                next.push(ext);
            }
        }
        out = next;
    }
    out
}

/// `P(all U_i in S_i)` by counting walks; sets are bitmasks over vertices.
pub fn enumerated_probability(walks: &[Vec<usize>], sets: &[u64]) -> f64 {
    let hits = walks.iter().filter(|w| w.iter().zip(sets).all(|(&y, &s)| s >> y & 1 == 1)).count();
    hits as f64 / walks.len() as f64
}

/// `P(all U_i in S)` for every single set `S`, indexed by mask.
pub fn enumerated_single_set(walks: &[Vec<usize>], n: usize) -> Vec<f64> {
    let mut g = vec![0.0; 1 << n];
    for w in walks {
        let mask = w.iter().fold(0usize, |m, &y| m | 1 << y);
        g[mask] += 1.0;
    }
    for b in 0..n {
        for mask in 0..g.len() {
            if mask >> b & 1 == 1 {
                g[mask] += g[mask ^ 1 << b];
            }
        }
    }
    let total = walks.len() as f64;
    g.into_iter().map(|c| c / total).collect()
}

/// The discretized cube: `t` independent coordinates, each 0 with probability
/// `q`, and `Z` the indicator of the all-zero corner.
pub fn cube_instance<T: Scalar>(q: T, t: usize) -> (RandomVariable<T>, Vec<RandomObject<T>>) {
    let coord = FiniteSpace::new(vec![q.clone(), T::one() - q]).unwrap();
    let factors: Vec<&FiniteSpace<T>> = (0..t).map(|_| &coord).collect();
    let (space, us) = FiniteSpace::product(&factors).unwrap();
    let z = RandomVariable::indicator(Arc::clone(&space), |o| us.iter().all(|u| u.value(o) == 0));
    (z, us)
}

pub fn random_law(rng: &mut ChaCha8Rng, k: usize) -> FiniteSpace<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let head: f64 = w[..k - 1].iter().sum();
    w[k - 1] = 1.0 - head;
    FiniteSpace::new(w).unwrap()
}

/// `t` independent copies of one random law, with a random `Z` in `[0, 1]`.
pub fn iid_instance(rng: &mut ChaCha8Rng, t: usize, k: usize) -> (RandomVariable<f64>, Vec<RandomObject<f64>>) {
    let law = random_law(rng, k);
    let factors: Vec<&FiniteSpace<f64>> = (0..t).map(|_| &law).collect();
    let (space, us) = FiniteSpace::product(&factors).unwrap();
    let values = (0..space.len()).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() }).collect();
    (RandomVariable::new(space, values).unwrap(), us)
}

/// Like [`iid_instance`] but `Z` depends only on the multiset of coordinates.
pub fn symmetric_instance(rng: &mut ChaCha8Rng, t: usize, k: usize) -> (RandomVariable<f64>, Vec<RandomObject<f64>>) {
    let law = random_law(rng, k);
    let factors: Vec<&FiniteSpace<f64>> = (0..t).map(|_| &law).collect();
    let (space, us) = FiniteSpace::product(&factors).unwrap();
    let mut by_key = std::collections::HashMap::new();
    let values = (0..space.len())
        .map(|o| {
            let mut key: Vec<usize> = us.iter().map(|u| u.value(o)).collect();
            key.sort_unstable();
            *by_key.entry(key).or_insert_with(|| rng.random::<f64>())
        })
        .collect();
    (RandomVariable::new(space, values).unwrap(), us)
}

/// Independent coordinates with different laws and codomain sizes.
pub fn mixed_instance(rng: &mut ChaCha8Rng, t: usize) -> (RandomVariable<f64>, Vec<RandomObject<f64>>) {
    let laws: Vec<FiniteSpace<f64>> = (0..t)
        .map(|_| {
            let k = rng.random_range(2..5);
            random_law(rng, k)
        })
        .collect();
    let factors: Vec<&FiniteSpace<f64>> = laws.iter().collect();
    let (space, us) = FiniteSpace::product(&factors).unwrap();
    let values = (0..space.len()).map(|_| rng.random::<f64>()).collect();
    (RandomVariable::new(space, values).unwrap(), us)
}
