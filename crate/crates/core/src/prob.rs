//! Finite probability spaces, random objects and conditional expectations,
//! together with evaluators for the conditional-expectation tail bounds.
//!
//! Sample points and codomain elements are opaque and addressed by index.
//! A [`RandomObject`] maps each sample point to an index in `0..codomain_len`;
//! a [`RandomVariable`] attaches a number to each sample point.
//!
//! The two bound families evaluated here are
//!
//! * identically distributed objects `U_0..U_{t-1}` with `W` the average of
//!   `W_i = E[Z | U_i]`: `E[Z] <= (alpha + beta * P_U{W > eps})^t + t * eps`;
//! * arbitrary objects with per-coordinate thresholds:
//!   `E[Z] <= prod_i (alpha + beta * P_{U_i}{W_i > eps_i}) + sum_i eps_i`,
//!
//! where `alpha = 1 - beta`, and `beta = 1` means plain independence.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, structural, Error, Result};
use crate::scalar::{one, ordered_product, ordered_sum, Scalar};

/// Slack below which a bound is reported as violated.
pub const HOLD_TOLERANCE: f64 = 1e-9;

/// Default ceiling on `2^|codomain| * t` for exhaustive independence sweeps.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 24;

/// Most witnesses kept in a report.
const MAX_WITNESSES: usize = 32;

/// A finite sample space with non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<T> {
    weights: Vec<T>,
}

impl<T: Scalar> FiniteSpace<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(structural("a probability space needs at least one outcome"));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite_value() || *w < T::zero() {
                return Err(domain(format!("weight {i} is negative or not finite: {w:?}")));
            }
        }
        let total = ordered_sum(weights.iter().cloned());
        if (total.clone() - one::<T>()).abs_value() > T::tolerance() {
            return Err(domain(format!("weights sum to {total:?}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(structural("a probability space needs at least one outcome"));
        }
        Ok(Self { weights: vec![T::from_ratio(1, n as u64); n] })
    }

    /// Product of the factor spaces, indexed row-major with factor 0 the
    /// slowest-varying coordinate, together with the coordinate projections.
    pub fn product(factors: &[&FiniteSpace<T>]) -> Result<(Arc<Self>, Vec<RandomObject<T>>)> {
        if factors.is_empty() {
            return Err(structural("product of zero factors"));
        }
        let size = factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.len()))
            .ok_or_else(|| Error::Resource { what: "product space size".into(), budget: usize::MAX as u64 })?;
        let mut weights = Vec::with_capacity(size);
        let mut coords = vec![Vec::with_capacity(size); factors.len()];
        let mut parts = Vec::with_capacity(factors.len());
        for idx in 0..size {
            let mut rest = idx;
            parts.clear();
            for (k, f) in factors.iter().enumerate().rev() {
                let c = rest % f.len();
                rest /= f.len();
                coords[k].push(c);
                parts.push(f.weights[c].clone());
            }
            // Ascending order makes the weight symmetric in the coordinates.
            parts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            weights.push(ordered_product(parts.iter().cloned()));
        }
        let space = Arc::new(Self::new(weights)?);
        let objects = coords
            .into_iter()
            .zip(factors)
            .map(|(map, f)| RandomObject { domain: Arc::clone(&space), codomain_len: f.len(), map })
            .collect();
        Ok((space, objects))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, outcome: usize) -> &T {
        &self.weights[outcome]
    }

    /// Probability of the event given as a membership predicate on outcomes.
    pub fn probability(&self, event: impl Fn(usize) -> bool) -> T {
        ordered_sum(self.weights.iter().enumerate().filter(|(i, _)| event(*i)).map(|(_, w)| w.clone()))
    }
}

fn same_space<T: Scalar>(a: &Arc<FiniteSpace<T>>, b: &Arc<FiniteSpace<T>>) -> bool {
    Arc::ptr_eq(a, b) || a.weights == b.weights
}

/// A total map from the sample points of a space to a finite codomain.
#[derive(Debug, Clone)]
pub struct RandomObject<T> {
    domain: Arc<FiniteSpace<T>>,
    codomain_len: usize,
    map: Vec<usize>,
}

impl<T: Scalar> RandomObject<T> {
    pub fn new(domain: Arc<FiniteSpace<T>>, codomain_len: usize, map: Vec<usize>) -> Result<Self> {
        if map.len() != domain.len() {
            return Err(structural(format!(
                "random object maps {} outcomes but the space has {}",
                map.len(),
                domain.len()
            )));
        }
        if let Some(bad) = map.iter().find(|&&a| a >= codomain_len) {
            return Err(structural(format!("image {bad} outside codomain of size {codomain_len}")));
        }
        Ok(Self { domain, codomain_len, map })
    }

    pub fn domain(&self) -> &Arc<FiniteSpace<T>> {
        &self.domain
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain_len
    }

    pub fn value(&self, outcome: usize) -> usize {
        self.map[outcome]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Per-point masses of the induced distribution on the codomain.
    pub fn law_weights(&self) -> Vec<T> {
        fiber_sums(&self.map, self.codomain_len, self.domain.weights.iter().cloned())
    }

    /// The induced space `(codomain, P_U)`.
    pub fn law(&self) -> FiniteSpace<T> {
        FiniteSpace { weights: self.law_weights() }
    }
}

/// A real-valued function on the sample points of a space.
#[derive(Debug, Clone)]
pub struct RandomVariable<T> {
    domain: Arc<FiniteSpace<T>>,
    values: Vec<T>,
}

impl<T: Scalar> RandomVariable<T> {
    pub fn new(domain: Arc<FiniteSpace<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(structural(format!(
                "random variable has {} values but the space has {} outcomes",
                values.len(),
                domain.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(crate::error::domain(format!("value at outcome {i} is not finite")));
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: Arc<FiniteSpace<T>>, c: T) -> Self {
        let values = vec![c; domain.len()];
        Self { domain, values }
    }

    pub fn indicator(domain: Arc<FiniteSpace<T>>, event: impl Fn(usize) -> bool) -> Self {
        let values = (0..domain.len()).map(|i| if event(i) { one() } else { T::zero() }).collect();
        Self { domain, values }
    }

    pub fn domain(&self) -> &Arc<FiniteSpace<T>> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, outcome: usize) -> &T {
        &self.values[outcome]
    }

    /// True when every value lies in `[0, 1]`.
    pub fn is_unit_bounded(&self) -> bool {
        self.values.iter().all(|v| *v >= T::zero() && *v <= one())
    }
}

/// Sums `terms` over each fiber of `map`, adding in ascending order so the
/// result does not depend on how outcomes are enumerated.
fn fiber_sums<T: Scalar>(map: &[usize], codomain_len: usize, terms: impl Iterator<Item = T>) -> Vec<T> {
    let mut buckets: Vec<Vec<T>> = vec![Vec::new(); codomain_len];
    for (x, &a) in terms.zip(map) {
        buckets[a].push(x);
    }
    buckets
        .into_iter()
        .map(|mut b| {
            b.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
            ordered_sum(b)
        })
        .collect()
}

/// `E[Z]`.
pub fn expectation<T: Scalar>(z: &RandomVariable<T>) -> T {
    ordered_sum(z.domain.weights.iter().zip(&z.values).map(|(w, v)| w.clone() * v.clone()))
}

/// `E[Z | U]` as a random variable on the induced space of `U`.
///
/// Points of zero induced mass get the value 0.
pub fn conditional_expectation<T: Scalar>(z: &RandomVariable<T>, u: &RandomObject<T>) -> Result<RandomVariable<T>> {
    if !same_space(&z.domain, &u.domain) {
        return Err(structural("random variable and random object live on different spaces"));
    }
    let mass = u.law_weights();
    let weighted = fiber_sums(&u.map, u.codomain_len, z.domain.weights.iter().zip(&z.values).map(|(w, v)| w.clone() * v.clone()));
    let values = weighted
        .into_iter()
        .zip(&mass)
        .map(|(num, m)| if *m > T::zero() { num / m.clone() } else { T::zero() })
        .collect();
    Ok(RandomVariable { domain: Arc::new(FiniteSpace { weights: mass }), values })
}

/// `P{W > eps}` with strict inequality.
pub fn tail_probability<T: Scalar>(w: &RandomVariable<T>, eps: &T) -> T {
    ordered_sum(w.domain.weights.iter().zip(&w.values).filter(|(_, v)| *v > eps).map(|(wt, _)| wt.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    /// Identically distributed, independent.
    Thm1i,
    /// Identically distributed, beta-independent.
    Thm1ii,
    /// Arbitrary marginals, independent.
    Thm2i,
    /// Arbitrary marginals, beta-independent.
    Thm2ii,
}

/// Outcome of evaluating one of the tail bounds on a concrete instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<T> {
    pub expectation: T,
    pub tail_terms: Vec<T>,
    pub bound_value: T,
    pub slack: T,
    pub holds: bool,
    pub variant: BoundVariant,
    pub beta: T,
    pub epsilons: Vec<T>,
}

fn validate_bound_inputs<T: Scalar>(z: &RandomVariable<T>, us: &[RandomObject<T>], beta: &T) -> Result<()> {
    if us.is_empty() {
        return Err(structural("at least one random object is required"));
    }
    if us.iter().any(|u| !same_space(&z.domain, &u.domain)) {
        return Err(structural("all random objects must share the random variable's space"));
    }
    if !z.is_unit_bounded() {
        return Err(domain("the random variable must satisfy 0 <= Z <= 1"));
    }
    if *beta < T::zero() || *beta > one() {
        return Err(domain(format!("beta must lie in [0, 1], got {beta:?}")));
    }
    Ok(())
}

fn check_eps<T: Scalar>(eps: &T) -> Result<()> {
    if *eps <= T::zero() || *eps >= one() {
        return Err(domain(format!("epsilon must lie strictly between 0 and 1, got {eps:?}")));
    }
    Ok(())
}

fn finish_report<T: Scalar>(
    z: &RandomVariable<T>,
    tails: Vec<T>,
    eps: Vec<T>,
    beta: T,
    variant: BoundVariant,
) -> BoundReport<T> {
    let alpha = one::<T>() - beta.clone();
    let product = ordered_product(tails.iter().map(|p| alpha.clone() + beta.clone() * p.clone()));
    let bound_value = product + ordered_sum(eps.iter().cloned());
    let expectation = expectation(z);
    let slack = bound_value.clone() - expectation.clone();
    let holds = slack >= T::zero() - T::from_f64(HOLD_TOLERANCE);
    BoundReport { expectation, tail_terms: tails, bound_value, slack, holds, variant, beta, epsilons: eps }
}

/// Bound for identically distributed objects, with `W` the average of the
/// conditional expectations. `beta = 1` gives the independent case.
///
/// The marginals must agree within [`Scalar::tolerance`]; otherwise use
/// [`eval_bound_thm2`].
pub fn eval_bound_thm1<T: Scalar>(z: &RandomVariable<T>, us: &[RandomObject<T>], eps: T, beta: T) -> Result<BoundReport<T>> {
    validate_bound_inputs(z, us, &beta)?;
    check_eps(&eps)?;
    let psi = us[0].codomain_len;
    if us.iter().any(|u| u.codomain_len != psi) {
        return Err(structural("random objects must share a codomain"));
    }
    let law = us[0].law_weights();
    for (i, u) in us.iter().enumerate().skip(1) {
        let other = u.law_weights();
        let far = law.iter().zip(&other).any(|(a, b)| (a.clone() - b.clone()).abs_value() > T::tolerance());
        if far {
            return Err(Error::Precondition(format!(
                "random object {i} is not identically distributed with object 0; use eval_bound_thm2"
            )));
        }
    }

    let t = us.len();
    let mut sum = vec![T::zero(); psi];
    for u in us {
        let w = conditional_expectation(z, u)?;
        for (s, v) in sum.iter_mut().zip(w.values) {
            *s = s.clone() + v;
        }
    }
    let t_scalar = T::from_usize(t);
    let average = RandomVariable {
        domain: Arc::new(FiniteSpace { weights: law }),
        values: sum.into_iter().map(|s| s / t_scalar.clone()).collect(),
    };
    let p = tail_probability(&average, &eps);
    let variant = if beta == one() { BoundVariant::Thm1i } else { BoundVariant::Thm1ii };
    Ok(finish_report(z, vec![p; t], vec![eps; t], beta, variant))
}

/// Bound for arbitrary marginals with per-coordinate thresholds.
pub fn eval_bound_thm2<T: Scalar>(
    z: &RandomVariable<T>,
    us: &[RandomObject<T>],
    eps_list: &[T],
    beta: T,
) -> Result<BoundReport<T>> {
    validate_bound_inputs(z, us, &beta)?;
    if eps_list.len() != us.len() {
        return Err(structural(format!(
            "{} random objects but {} thresholds",
            us.len(),
            eps_list.len()
        )));
    }
    eps_list.iter().try_for_each(check_eps)?;
    let tails = us
        .iter()
        .zip(eps_list)
        .map(|(u, e)| conditional_expectation(z, u).map(|w| tail_probability(&w, e)))
        .collect::<Result<Vec<_>>>()?;
    let variant = if beta == one() { BoundVariant::Thm2i } else { BoundVariant::Thm2ii };
    Ok(finish_report(z, tails, eps_list.to_vec(), beta, variant))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndependenceMode {
    /// Every single-set family plus `trials` sampled multi-set families.
    Exhaustive,
    /// Sampled multi-set families only.
    Sampled,
}

#[derive(Debug, Clone, Copy)]
pub struct IndependenceConfig {
    pub mode: IndependenceMode,
    pub trials: usize,
    pub seed: u64,
    /// Ceiling on `2^|codomain| * t` in exhaustive mode.
    pub budget: u64,
}

impl IndependenceConfig {
    pub fn exhaustive(trials: usize, seed: u64) -> Self {
        Self { mode: IndependenceMode::Exhaustive, trials, seed, budget: DEFAULT_ENUMERATION_BUDGET }
    }

    pub fn sampled(trials: usize, seed: u64) -> Self {
        Self { mode: IndependenceMode::Sampled, trials, seed, budget: DEFAULT_ENUMERATION_BUDGET }
    }
}

/// A family of sets whose joint probability exceeded the product bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceWitness {
    pub sets: Vec<Vec<usize>>,
    pub probability: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    /// Largest `P(all U_i in S_i) / prod(alpha + beta * mu_i)` seen, with 0/0 = 0.
    pub worst_ratio: f64,
    pub families_checked: u64,
    pub witnesses: Vec<IndependenceWitness>,
}

impl IndependenceReport {
    pub fn holds(&self) -> bool {
        self.witnesses.is_empty()
    }
}

pub(crate) struct RatioTracker {
    worst: f64,
    checked: u64,
    witnesses: Vec<IndependenceWitness>,
}

impl RatioTracker {
    pub(crate) fn new() -> Self {
        Self { worst: 0.0, checked: 0, witnesses: Vec::new() }
    }

    pub(crate) fn record<T: Scalar>(&mut self, lhs: &T, bound: &T, sets: impl FnOnce() -> Vec<Vec<usize>>) {
        self.checked += 1;
        let ratio = if *lhs == T::zero() {
            0.0
        } else if *bound == T::zero() {
            f64::INFINITY
        } else {
            (lhs.clone() / bound.clone()).to_f64()
        };
        if ratio > self.worst {
            self.worst = ratio;
        }
        let limit = bound.clone() * (one::<T>() + T::from_f64(HOLD_TOLERANCE));
        if *lhs > limit && self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(IndependenceWitness {
                sets: sets(),
                probability: lhs.to_f64(),
                bound: bound.to_f64(),
                ratio,
            });
        }
    }

    pub(crate) fn finish(self) -> IndependenceReport {
        IndependenceReport { worst_ratio: self.worst, families_checked: self.checked, witnesses: self.witnesses }
    }
}

fn mask_members(mask: u64, len: usize) -> Vec<usize> {
    (0..len).filter(|a| mask >> a & 1 == 1).collect()
}

/// In-place subset-sum transform: `g[T] <- sum over S subset of T of g[S]`.
pub(crate) fn subset_sums<T: Scalar>(g: &mut [T], bits: usize) {
    for b in 0..bits {
        let bit = 1usize << b;
        for mask in 0..g.len() {
            if mask & bit != 0 {
                g[mask] = g[mask].clone() + g[mask ^ bit].clone();
            }
        }
    }
}

/// Checks `P(all U_i in S_i) <= prod_i (alpha + beta * P{U_i in S_i})`.
///
/// Exhaustive mode covers every family with all `S_i` equal (exactly, via a
/// subset-sum transform over the codomain) and then samples `trials` families
/// with independent random `S_i`. Sampled mode does only the latter.
pub fn check_independence<T: Scalar>(us: &[RandomObject<T>], beta: &T, config: &IndependenceConfig) -> Result<IndependenceReport> {
    let first = us.first().ok_or_else(|| structural("at least one random object is required"))?;
    if us.iter().any(|u| !same_space(&first.domain, &u.domain)) {
        return Err(structural("random objects must share a space"));
    }
    if *beta < T::zero() || *beta > one() {
        return Err(domain(format!("beta must lie in [0, 1], got {beta:?}")));
    }
    let psi = first.codomain_len;
    if us.iter().any(|u| u.codomain_len != psi) {
        return Err(structural("random objects must share a codomain"));
    }
    let alpha = one::<T>() - beta.clone();
    let laws: Vec<Vec<T>> = us.iter().map(RandomObject::law_weights).collect();
    let weights = first.domain.weights();
    let mut tracker = RatioTracker::new();

    if config.mode == IndependenceMode::Exhaustive {
        let cost = if psi >= 40 { u64::MAX } else { (1u64 << psi).saturating_mul(us.len() as u64) };
        if cost > config.budget {
            return Err(Error::Resource {
                what: format!("exhaustive single-set sweep over 2^{psi} subsets x {} objects", us.len()),
                budget: config.budget,
            });
        }
        let size = 1usize << psi;
        let mut joint = vec![T::zero(); size];
        for (outcome, w) in weights.iter().enumerate() {
            let mask = us.iter().fold(0usize, |m, u| m | 1 << u.map[outcome]);
            joint[mask] = joint[mask].clone() + w.clone();
        }
        subset_sums(&mut joint, psi);

        let mut bound = vec![one::<T>(); size];
        let mut scratch = vec![T::zero(); size];
        for law in &laws {
            scratch.iter_mut().for_each(|s| *s = T::zero());
            for (a, m) in law.iter().enumerate() {
                scratch[1 << a] = m.clone();
            }
            subset_sums(&mut scratch, psi);
            for (b, mu) in bound.iter_mut().zip(&scratch) {
                *b = b.clone() * (alpha.clone() + beta.clone() * mu.clone());
            }
        }
        for mask in 0..size {
            tracker.record(&joint[mask], &bound[mask], || vec![mask_members(mask as u64, psi); us.len()]);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.trials {
        let sets: Vec<Vec<bool>> = (0..us.len()).map(|_| (0..psi).map(|_| rng.random::<bool>()).collect()).collect();
        let lhs = ordered_sum(
            weights
                .iter()
                .enumerate()
                .filter(|(o, _)| us.iter().zip(&sets).all(|(u, s)| s[u.map[*o]]))
                .map(|(_, w)| w.clone()),
        );
        let bound = ordered_product(laws.iter().zip(&sets).map(|(law, s)| {
            let mu = ordered_sum(law.iter().zip(s).filter(|(_, &inside)| inside).map(|(m, _)| m.clone()));
            alpha.clone() + beta.clone() * mu
        }));
        tracker.record(&lhs, &bound, || {
            sets.iter().map(|s| s.iter().enumerate().filter(|(_, &b)| b).map(|(a, _)| a).collect()).collect()
        });
    }
    Ok(tracker.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn uniform_pair(n: usize) -> (Arc<FiniteSpace<f64>>, Vec<RandomObject<f64>>) {
        let f = FiniteSpace::uniform(n).unwrap();
        FiniteSpace::product(&[&f, &f]).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(FiniteSpace::new(vec![0.5, 0.6]), Err(Error::Domain(_))));
        assert!(matches!(FiniteSpace::new(vec![1.5, -0.5]), Err(Error::Domain(_))));
        assert!(matches!(FiniteSpace::<f64>::new(vec![]), Err(Error::Structural(_))));
        assert!(FiniteSpace::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn random_object_images_must_fit() {
        let s = Arc::new(FiniteSpace::<f64>::uniform(3).unwrap());
        assert!(RandomObject::new(Arc::clone(&s), 2, vec![0, 1, 2]).is_err());
        assert!(RandomObject::new(Arc::clone(&s), 2, vec![0, 1]).is_err());
        assert!(RandomObject::new(s, 3, vec![0, 1, 2]).is_ok());
    }

    #[test]
    fn expectation_of_indicator_and_constant() {
        let s = Arc::new(FiniteSpace::new(vec![0.3f64, 0.5, 0.2]).unwrap());
        let ind = RandomVariable::indicator(Arc::clone(&s), |i| i == 0);
        assert!((expectation(&ind) - 0.3).abs() < 1e-15);
        assert_eq!(expectation(&RandomVariable::constant(s, 1.0)), 1.0);
    }

    #[test]
    fn conditional_expectation_of_constant_is_constant() {
        let (space, us) = uniform_pair(3);
        let z = RandomVariable::constant(space, 0.7);
        let w = conditional_expectation(&z, &us[1]).unwrap();
        assert!(w.values().iter().all(|v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn zero_mass_points_get_zero() {
        let s = Arc::new(FiniteSpace::new(vec![0.5, 0.5]).unwrap());
        let u = RandomObject::new(Arc::clone(&s), 3, vec![0, 2]).unwrap();
        let z = RandomVariable::new(s, vec![1.0, 0.5]).unwrap();
        let w = conditional_expectation(&z, &u).unwrap();
        assert_eq!(w.values(), &[1.0, 0.0, 0.5]);
        assert_eq!(w.domain().weights(), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn mismatched_domains_are_structural_errors() {
        let (space, _) = uniform_pair(2);
        let other = Arc::new(FiniteSpace::new(vec![0.1, 0.9]).unwrap());
        let u = RandomObject::new(other, 2, vec![0, 1]).unwrap();
        let z = RandomVariable::constant(space, 0.5);
        assert!(matches!(conditional_expectation(&z, &u), Err(Error::Structural(_))));
    }

    #[test]
    fn tail_is_strict() {
        let s = Arc::new(FiniteSpace::<f64>::uniform(4).unwrap());
        let w = RandomVariable::constant(s, 0.5);
        assert_eq!(tail_probability(&w, &0.5), 0.0);
        assert_eq!(tail_probability(&w, &0.49), 1.0);
    }

    #[test]
    fn thm1_rejects_out_of_range_eps_and_unbounded_z() {
        let (space, us) = uniform_pair(2);
        let z = RandomVariable::constant(Arc::clone(&space), 0.5);
        assert!(matches!(eval_bound_thm1(&z, &us, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(eval_bound_thm1(&z, &us, 1.0, 1.0), Err(Error::Domain(_))));
        let big = RandomVariable::constant(space, 1.5);
        assert!(matches!(eval_bound_thm1(&big, &us, 0.1, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn thm1_rejects_differently_distributed_objects() {
        let a = FiniteSpace::new(vec![0.5, 0.5]).unwrap();
        let b = FiniteSpace::new(vec![0.9, 0.1]).unwrap();
        let (space, us) = FiniteSpace::product(&[&a, &b]).unwrap();
        let z = RandomVariable::constant(space, 0.5);
        let err = eval_bound_thm1(&z, &us, 0.1, 1.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(ref m) if m.contains("eval_bound_thm2")));
    }

    #[test]
    fn thm2_length_mismatch() {
        let (space, us) = uniform_pair(2);
        let z = RandomVariable::constant(space, 0.5);
        assert!(matches!(eval_bound_thm2(&z, &us, &[0.1], 1.0), Err(Error::Structural(_))));
    }

    #[test]
    fn beta_zero_bound_is_vacuous() {
        let (space, us) = uniform_pair(3);
        let z = RandomVariable::indicator(space, |i| i % 2 == 0);
        let r = eval_bound_thm1(&z, &us, 0.05, 0.0).unwrap();
        assert_eq!(r.variant, BoundVariant::Thm1ii);
        assert!((r.bound_value - 1.1).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn thm2_single_coordinate_matches_direct_computation() {
        let s = Arc::new(FiniteSpace::new(vec![0.1f64, 0.2, 0.3, 0.4]).unwrap());
        let u = RandomObject::new(Arc::clone(&s), 2, vec![0, 0, 1, 1]).unwrap();
        let z = RandomVariable::new(s, vec![1.0, 0.0, 0.5, 0.25]).unwrap();
        let r = eval_bound_thm2(&z, &[u], &[0.3], 1.0).unwrap();
        // W(0) = 0.1/0.3, W(1) = (0.15 + 0.1)/0.7 = 0.357..; both exceed 0.3.
        assert!((r.tail_terms[0] - 1.0).abs() < 1e-15);
        assert!((r.bound_value - 1.3).abs() < 1e-15);
        assert!((r.expectation - 0.35).abs() < 1e-15);
    }

    #[test]
    fn exact_arithmetic_bounds() {
        let f = FiniteSpace::<Exact>::uniform(2).unwrap();
        let (space, us) = FiniteSpace::product(&[&f, &f]).unwrap();
        let z = RandomVariable::indicator(space, |i| i == 0);
        let r = eval_bound_thm1(&z, &us, Exact::from_ratio(1, 10), Exact::from_ratio(1, 1)).unwrap();
        assert_eq!(r.expectation, Exact::from_ratio(1, 4));
        assert_eq!(r.tail_terms[0], Exact::from_ratio(1, 2));
        assert_eq!(r.bound_value, Exact::from_ratio(9, 20));
    }

    #[test]
    fn independent_projections_have_unit_worst_ratio() {
        let a = FiniteSpace::new(vec![0.2, 0.3, 0.5]).unwrap();
        let (_, us) = FiniteSpace::product(&[&a, &a, &a]).unwrap();
        let r = check_independence(&us, &1.0, &IndependenceConfig::exhaustive(200, 7)).unwrap();
        assert!(r.holds());
        assert!((r.worst_ratio - 1.0).abs() < 1e-12);
        assert_eq!(r.families_checked, 8 + 200);
    }

    #[test]
    fn beta_zero_never_violates() {
        // Fully dependent copies violate independence but not the beta = 0 bound.
        let s = Arc::new(FiniteSpace::<f64>::uniform(4).unwrap());
        let u = RandomObject::new(s, 4, vec![0, 1, 2, 3]).unwrap();
        let us = vec![u.clone(), u.clone(), u];
        let r = check_independence(&us, &0.0, &IndependenceConfig::exhaustive(100, 1)).unwrap();
        assert!(r.worst_ratio <= 1.0);
        let dependent = check_independence(&us, &1.0, &IndependenceConfig::sampled(0, 1)).unwrap();
        assert_eq!(dependent.families_checked, 0);
        let violated = check_independence(&us, &1.0, &IndependenceConfig::exhaustive(0, 1)).unwrap();
        assert!(!violated.holds());
        assert!(violated.worst_ratio > 1.0);
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let s = Arc::new(FiniteSpace::<f64>::uniform(30).unwrap());
        let u = RandomObject::new(s, 30, (0..30).collect()).unwrap();
        let err = check_independence(&[u], &1.0, &IndependenceConfig::exhaustive(0, 0)).unwrap_err();
        assert!(matches!(err, Error::Resource { budget, .. } if budget == DEFAULT_ENUMERATION_BUDGET));
    }

    #[test]
    fn subset_sums_match_direct_sums() {
        let mut g: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let orig = g.clone();
        subset_sums(&mut g, 4);
        for (t, &sum) in g.iter().enumerate() {
            let direct: f64 = (0..16usize).filter(|s| s & !t == 0).map(|s| orig[s]).sum();
            assert_eq!(sum, direct);
        }
    }
}
