//! Directed walks on hybrid expander-permutation graphs `G' = (V, F o E)`.
//!
//! A `t`-walk is a start vertex plus `t` out-labels; the `s`-th step follows
//! label `j` in the base graph and then applies `F`. With loops and parallel
//! edges the label sequence, not the vertex sequence, identifies a walk, so
//! there are exactly `N d^t` of them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, structural, Error, Result};
use crate::perm::Permutation;
use crate::prob::{IndependenceConfig, IndependenceMode, IndependenceReport, RatioTracker, DEFAULT_ENUMERATION_BUDGET};
use crate::scalar::{one, ordered_product, Scalar};
use crate::spectral::{compose_permutation, transition_matrix, ColoredRotation, DirectedTransitionMatrix, Projection};

/// Largest vertex count for the exhaustive sweep over all `2^N` single sets.
pub const SUBSET_ENUMERATION_LIMIT: usize = 20;

/// Largest `N d^t` for explicit walk enumeration.
pub const WALK_ENUMERATION_LIMIT: u64 = DEFAULT_ENUMERATION_BUDGET;

#[derive(Debug, Clone)]
pub struct HybridGraph {
    rot: ColoredRotation,
    f: Permutation,
    a_prime: DirectedTransitionMatrix,
}

impl HybridGraph {
    pub fn new(rot: ColoredRotation, f: Permutation) -> Result<Self> {
        let a_prime = compose_permutation(&transition_matrix(&rot), &f)?;
        Ok(Self { rot, f, a_prime })
    }

    pub fn rotation(&self) -> &ColoredRotation {
        &self.rot
    }

    pub fn permutation(&self) -> &Permutation {
        &self.f
    }

    pub fn transition(&self) -> &DirectedTransitionMatrix {
        &self.a_prime
    }

    pub fn vertex_count(&self) -> usize {
        self.rot.vertex_count()
    }

    pub fn degree(&self) -> usize {
        self.rot.degree()
    }

    /// Follow base label `j` out of `u`, then apply `F`.
    #[inline]
    pub fn step(&self, u: usize, j: usize) -> usize {
        self.f.apply(self.rot.neighbor(u, j))
    }

    /// In-label at the head of the step `u --j-->`: the label of the base edge
    /// at its far endpoint.
    #[inline]
    pub fn in_label(&self, u: usize, j: usize) -> usize {
        self.rot.rotate(u, j).1
    }

    /// `(out_degree, in_degree)` per vertex, counted over all `(u, j)`.
    pub fn degree_profile(&self) -> Vec<(usize, usize)> {
        let n = self.vertex_count();
        let mut indeg = vec![0; n];
        for u in 0..n {
            for j in 0..self.degree() {
                indeg[self.step(u, j)] += 1;
            }
        }
        indeg.into_iter().map(|i| (self.degree(), i)).collect()
    }

    pub fn is_regular(&self) -> bool {
        self.degree_profile().iter().all(|&(o, i)| o == self.degree() && i == self.degree())
    }

    /// The walk starting at `start` that follows `labels`.
    pub fn walk_from_labels(&self, start: usize, labels: Vec<usize>) -> Result<Walk> {
        if start >= self.vertex_count() {
            return Err(structural(format!("start vertex {start} out of range")));
        }
        let mut vertices = Vec::with_capacity(labels.len() + 1);
        vertices.push(start);
        for &j in &labels {
            if j >= self.degree() {
                return Err(structural(format!("label {j} out of range for degree {}", self.degree())));
            }
            vertices.push(self.step(*vertices.last().expect("non-empty"), j));
        }
        Ok(Walk { vertices, labels })
    }

    /// True when every step of `w` is an edge of `G'` with the recorded label.
    pub fn is_walk(&self, w: &Walk) -> bool {
        w.vertices.len() == w.labels.len() + 1
            && w.vertices.iter().all(|&v| v < self.vertex_count())
            && w.labels.iter().all(|&j| j < self.degree())
            && w.labels.iter().enumerate().all(|(s, &j)| self.step(w.vertices[s], j) == w.vertices[s + 1])
    }

    /// Walk number `index` in the order (start vertex, then labels base `d`, first label most significant).
    pub fn walk_from_index(&self, t: usize, index: u64) -> Result<Walk> {
        let total = walk_count(self, t)?;
        if index >= total {
            return Err(domain(format!("walk index {index} out of range 0..{total}")));
        }
        let d = self.degree() as u64;
        let mut rest = index;
        let mut labels = vec![0; t];
        for slot in labels.iter_mut().rev() {
            *slot = (rest % d) as usize;
            rest /= d;
        }
        self.walk_from_labels(rest as usize, labels)
    }

    /// Inverse of [`HybridGraph::walk_from_index`].
    pub fn walk_index(&self, w: &Walk) -> u64 {
        let d = self.degree() as u64;
        w.labels.iter().fold(w.vertices[0] as u64, |acc, &j| acc * d + j as u64)
    }
}

/// A directed walk: `t + 1` vertices and the `t` base-graph labels used.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Walk {
    vertices: Vec<usize>,
    labels: Vec<usize>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().expect("walks have at least one vertex")
    }

    /// `U_i(y) = y_i`.
    pub fn project(&self, i: usize) -> usize {
        self.vertices[i]
    }

    /// The walk without its last step.
    pub fn truncate(&self) -> Option<Walk> {
        (!self.labels.is_empty()).then(|| Walk {
            vertices: self.vertices[..self.vertices.len() - 1].to_vec(),
            labels: self.labels[..self.labels.len() - 1].to_vec(),
        })
    }
}

/// Vertices as decimals, then ` / ` and the labels when `t > 0`.
impl fmt::Display for Walk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[usize]| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        write!(f, "{}", join(&self.vertices))?;
        if !self.labels.is_empty() {
            write!(f, " / {}", join(&self.labels))?;
        }
        Ok(())
    }
}

impl FromStr for Walk {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse = |part: &str| {
            part.split_whitespace()
                .map(|x| x.parse::<usize>().map_err(|e| structural(format!("bad walk entry {x:?}: {e}"))))
                .collect::<Result<Vec<_>>>()
        };
        let (vs, ls) = s.split_once('/').unwrap_or((s, ""));
        let vertices = parse(vs)?;
        let labels = parse(ls)?;
        if vertices.is_empty() || vertices.len() != labels.len() + 1 {
            return Err(structural(format!("walk needs t+1 vertices and t labels, got {} and {}", vertices.len(), labels.len())));
        }
        Ok(Walk { vertices, labels })
    }
}

/// `N d^t`.
pub fn walk_count(g: &HybridGraph, t: usize) -> Result<u64> {
    let overflow = || Error::Resource { what: format!("walk count N*d^{t} exceeds 64 bits"), budget: u64::MAX };
    let d = g.degree() as u64;
    (0..t).try_fold(g.vertex_count() as u64, |acc, _| acc.checked_mul(d)).ok_or_else(overflow)
}

/// Bits for the succinct encoding `ceil(lg N) + t lg d` and the vertex list `(t+1) ceil(lg N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BitAccounting {
    pub succinct: u64,
    pub cartesian: u64,
}

pub fn bit_accounting(g: &HybridGraph, t: usize) -> Result<BitAccounting> {
    let e = g.rotation().label_bits().ok_or_else(|| domain("degree must be a power of two"))? as u64;
    let n = (g.vertex_count() as u64).next_power_of_two().trailing_zeros() as u64;
    Ok(BitAccounting { succinct: n + t as u64 * e, cartesian: (t as u64 + 1) * n })
}

/// Uniform start vertex, then `t` uniform labels.
pub fn sample_walk(g: &HybridGraph, t: usize, seed: u64) -> Walk {
    sample_walk_with(g, t, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_walk_with<R: Rng + ?Sized>(g: &HybridGraph, t: usize, rng: &mut R) -> Walk {
    let start = rng.random_range(0..g.vertex_count());
    let labels = (0..t).map(|_| rng.random_range(0..g.degree())).collect();
    g.walk_from_labels(start, labels).expect("sampled labels are in range")
}

/// Calls `visit` on every `t`-walk in index order.
pub fn for_each_walk(g: &HybridGraph, t: usize, mut visit: impl FnMut(&Walk)) -> Result<()> {
    let total = walk_count(g, t)?;
    if total > WALK_ENUMERATION_LIMIT {
        return Err(Error::Resource { what: format!("enumerating {total} walks"), budget: WALK_ENUMERATION_LIMIT });
    }
    for index in 0..total {
        visit(&g.walk_from_index(t, index)?);
    }
    Ok(())
}

pub fn enumerate_walks(g: &HybridGraph, t: usize) -> Result<Vec<Walk>> {
    let mut out = Vec::new();
    for_each_walk(g, t, |w| out.push(w.clone()))?;
    Ok(out)
}

/// Per-vertex endpoint masses of a walk event, and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalVector<T> {
    pub probs: Vec<T>,
    pub total: T,
}

impl<T: Scalar> TerminalVector<T> {
    fn from_probs(probs: Vec<T>) -> Self {
        let total = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
        Self { probs, total }
    }
}

/// `u P_0 A' P_1 ... A' P_t` with `u = N^{-1}(1, ..., 1)`.
pub fn terminal_vector<T: Scalar>(g: &HybridGraph, t: usize, constraints: &[Projection]) -> Result<TerminalVector<T>> {
    if constraints.len() != t + 1 {
        return Err(structural(format!("expected {} constraint sets, got {}", t + 1, constraints.len())));
    }
    let n = g.vertex_count();
    if constraints.iter().any(|p| p.dim() != n) {
        return Err(structural("constraint set dimension does not match the graph"));
    }
    let mut v = vec![T::from_ratio(1, n as u64); n];
    constraints[0].apply_in_place(&mut v);
    for p in &constraints[1..] {
        v = g.transition().vec_mul(&v)?;
        p.apply_in_place(&mut v);
    }
    Ok(TerminalVector::from_probs(v))
}

/// Projections from vertex-index lists, one per walk position.
pub fn constraints_from_sets(n: usize, sets: &[Vec<usize>]) -> Result<Vec<Projection>> {
    sets.iter().map(|s| Projection::from_indices(n, s.iter().copied())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Report<T> {
    /// `P(S)` on the `t`-walk space.
    pub prob_extended: T,
    /// `P'(S')` on the `(t-1)`-walk space.
    pub prob_base: T,
    /// `v`, terminal vector of `S`.
    pub extended: Vec<T>,
    /// `v' A'`.
    pub propagated: Vec<T>,
    pub max_abs_diff: f64,
}

impl<T: Scalar> Lemma4Report<T> {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_abs_diff <= tol && (self.prob_extended.clone() - self.prob_base.clone()).abs_value().to_f64() <= tol
    }
}

/// Compares `S = {y : truncation of y in S'}` against `S'`: equal probability
/// and `v = v' A'`. `s_prime` holds `(t-1)`-walks; duplicates are ignored.
pub fn check_lemma4<T: Scalar>(g: &HybridGraph, t: usize, s_prime: &[Walk]) -> Result<Lemma4Report<T>> {
    if t == 0 {
        return Err(domain("t must be at least 1"));
    }
    let n = g.vertex_count();
    let d = g.degree();
    let count_base = walk_count(g, t - 1)?;
    let count_ext = walk_count(g, t)?;
    if count_ext > WALK_ENUMERATION_LIMIT {
        return Err(Error::Resource { what: format!("explicit walk sets over {count_ext} walks"), budget: WALK_ENUMERATION_LIMIT });
    }
    let mut seen = HashSet::new();
    let mut base = vec![T::zero(); n];
    let mut extended = vec![T::zero(); n];
    let mass_base = T::from_ratio(1, count_base);
    let mass_ext = T::from_ratio(1, count_ext);
    let (mut k_base, mut k_ext) = (0u64, 0u64);
    for w in s_prime {
        if w.len() != t - 1 || !g.is_walk(w) {
            return Err(structural(format!("{w} is not a {}-walk of the graph", t - 1)));
        }
        if !seen.insert(g.walk_index(w)) {
            continue;
        }
        k_base += 1;
        base[w.end()] = base[w.end()].clone() + mass_base.clone();
        for j in 0..d {
            let y = g.step(w.end(), j);
            extended[y] = extended[y].clone() + mass_ext.clone();
            k_ext += 1;
        }
    }
    let propagated = g.transition().vec_mul(&base)?;
    let max_abs_diff = extended
        .iter()
        .zip(&propagated)
        .map(|(a, b)| (a.clone() - b.clone()).abs_value().to_f64())
        .fold(0.0, f64::max);
    Ok(Lemma4Report {
        prob_extended: T::from_ratio(k_ext, count_ext),
        prob_base: T::from_ratio(k_base, count_base),
        extended,
        propagated,
        max_abs_diff,
    })
}

/// Checks `P(all U_i in S_i) <= prod_{i=0}^{t} (alpha + beta mu_i)` on the
/// `t`-walk space with `alpha = 1 - beta`, computing the left side with
/// terminal vectors.
///
/// Exhaustive mode sweeps every family with all `S_i` equal (`2^N` of them,
/// `N <=` [`SUBSET_ENUMERATION_LIMIT`]) and then `config.trials` sampled
/// families with independent `S_i`.
pub fn verify_theorem4<T: Scalar>(g: &HybridGraph, t: usize, beta: T, config: &IndependenceConfig) -> Result<IndependenceReport> {
    if beta < T::zero() || beta > one() {
        return Err(domain(format!("beta must lie in [0, 1], got {beta:?}")));
    }
    let n = g.vertex_count();
    let alpha = one::<T>() - beta.clone();
    let factor = |p: &Projection| alpha.clone() + beta.clone() * p.mu::<T>();
    let mut tracker = RatioTracker::new();

    if config.mode == IndependenceMode::Exhaustive {
        if n > SUBSET_ENUMERATION_LIMIT {
            return Err(Error::Resource {
                what: format!("exhaustive single-set sweep over 2^{n} subsets"),
                budget: 1 << SUBSET_ENUMERATION_LIMIT,
            });
        }
        for mask in 0..(1u64 << n) {
            let s = Projection::from_mask(n, mask);
            let family = vec![s; t + 1];
            let lhs = terminal_vector::<T>(g, t, &family)?.total;
            let bound = ordered_product(family.iter().map(&factor));
            tracker.record(&lhs, &bound, || vec![family[0].indices(); t + 1]);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.trials {
        let family: Vec<Projection> = (0..=t).map(|_| Projection::random(n, &mut rng)).collect();
        let lhs = terminal_vector::<T>(g, t, &family)?.total;
        let bound = ordered_product(family.iter().map(&factor));
        tracker.record(&lhs, &bound, || family.iter().map(Projection::indices).collect());
    }
    Ok(tracker.finish())
}
