//! Table-based one-way function laboratory.
//!
//! Bit strings of length `n` are integers in `0..2^n`, most significant bit
//! first. Adversaries are randomized partial inverters: an attempt either
//! returns a verified preimage or nothing.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};
use crate::perm::Permutation;
use crate::scalar::{one, ordered_product, ordered_sum, Scalar};
use crate::walks::{HybridGraph, Walk};

/// Largest input or output length of a tabulated function.
pub const TOY_BITS_LIMIT: u32 = 20;

const NO_PREIMAGE: u64 = u64::MAX;

fn mask(bits: u32) -> u64 {
    (1u64 << bits) - 1
}

fn check_bits(bits: u32, what: &str) -> Result<()> {
    if bits > TOY_BITS_LIMIT {
        return Err(Error::Resource { what: format!("{what} of {bits} bits"), budget: 1 << TOY_BITS_LIMIT });
    }
    Ok(())
}

/// A function `{0,1}^n_in -> {0,1}^n_out` given by its table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyFunction {
    n_in: u32,
    n_out: u32,
    table: Vec<u64>,
    is_permutation: bool,
    min_preimage: Vec<u64>,
}

impl ToyFunction {
    pub fn from_table(n_in: u32, n_out: u32, table: Vec<u64>) -> Result<Self> {
        check_bits(n_in, "input")?;
        check_bits(n_out, "output")?;
        if table.len() != 1usize << n_in {
            return Err(structural(format!("table has {} entries, expected 2^{n_in}", table.len())));
        }
        let mut min_preimage = vec![NO_PREIMAGE; 1usize << n_out];
        for (x, &y) in table.iter().enumerate() {
            let slot = min_preimage
                .get_mut(y as usize)
                .ok_or_else(|| structural(format!("image {y} of {x} exceeds {n_out} bits")))?;
            if *slot == NO_PREIMAGE {
                *slot = x as u64;
            }
        }
        let is_permutation = n_in == n_out && min_preimage.iter().all(|&x| x != NO_PREIMAGE);
        Ok(Self { n_in, n_out, table, is_permutation, min_preimage })
    }

    pub fn identity(n: u32) -> Result<Self> {
        check_bits(n, "input")?;
        Self::from_table(n, n, (0..1u64 << n).collect())
    }

    pub fn from_permutation(p: &Permutation) -> Result<Self> {
        if !p.len().is_power_of_two() {
            return Err(domain(format!("permutation on {} points is not on bit strings", p.len())));
        }
        let n = p.len().trailing_zeros();
        Self::from_table(n, n, p.as_slice().iter().map(|&v| v as u64).collect())
    }

    pub fn random_permutation(n: u32, seed: u64) -> Result<Self> {
        check_bits(n, "input")?;
        Self::from_permutation(&Permutation::from_seed(1usize << n, seed))
    }

    pub fn n_in(&self) -> u32 {
        self.n_in
    }

    pub fn n_out(&self) -> u32 {
        self.n_out
    }

    pub fn is_permutation(&self) -> bool {
        self.is_permutation
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn domain_size(&self) -> u64 {
        1 << self.n_in
    }

    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        self.table[x as usize]
    }

    /// Smallest `x` with `F(x) = y`.
    pub fn smallest_preimage(&self, y: u64) -> Option<u64> {
        self.min_preimage.get(y as usize).copied().filter(|&x| x != NO_PREIMAGE)
    }

    /// True when the table is a bijection, checked over every input.
    pub fn check_bijective(&self) -> bool {
        if self.n_in != self.n_out {
            return false;
        }
        let mut seen = vec![false; self.table.len()];
        self.table.iter().all(|&y| !std::mem::replace(&mut seen[y as usize], true))
    }
}

/// `F'(x_0 x_1 ... x_{t-1}) = F(x_0) F(x_1) ... F(x_{t-1})`, block 0 most significant.
pub fn direct_power(f: &ToyFunction, t: u32) -> Result<ToyFunction> {
    if t == 0 {
        return Err(domain("t must be at least 1"));
    }
    let n_in = f.n_in * t;
    let n_out = f.n_out * t;
    check_bits(n_in, "direct-power input")?;
    check_bits(n_out, "direct-power output")?;
    let table = (0..1u64 << n_in)
        .map(|x| {
            (0..t).fold(0u64, |acc, b| {
                let block = x >> (f.n_in * (t - 1 - b)) & mask(f.n_in);
                acc << f.n_out | f.eval(block)
            })
        })
        .collect();
    ToyFunction::from_table(n_in, n_out, table)
}

/// `n t` bits for the direct power against `n + t e` for the walk construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InputBlowup {
    pub direct_power_bits: u32,
    pub walk_bits: u32,
}

pub fn input_blowup(n: u32, t: u32, e: u32) -> InputBlowup {
    InputBlowup { direct_power_bits: n * t, walk_bits: n + t * e }
}

/// A succinct walk encoding: `n`-bit vertex then `t` labels of `e` bits each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WalkRepr {
    bits: u64,
    len: u32,
}

impl WalkRepr {
    pub fn new(bits: u64, len: u32) -> Result<Self> {
        if len > 63 || bits >> len != 0 {
            return Err(structural(format!("{bits} does not fit in {len} bits")));
        }
        Ok(Self { bits, len })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl fmt::Display for WalkRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (0..self.len).rev().try_for_each(|b| write!(f, "{}", self.bits >> b & 1))
    }
}

/// `(n, e)` with `N = 2^n` and `d = 2^e`.
pub fn walk_layout(g: &HybridGraph) -> Result<(u32, u32)> {
    let rot = g.rotation();
    match (rot.vertex_bits(), rot.label_bits()) {
        (Some(n), Some(e)) => Ok((n, e)),
        _ => Err(domain("vertex count and degree must be powers of two")),
    }
}

fn pack(n: u32, e: u32, head: usize, labels: impl Iterator<Item = usize>) -> Result<WalkRepr> {
    let mut bits = head as u64;
    let mut len = n;
    for j in labels {
        bits = bits << e | j as u64;
        len += e;
    }
    WalkRepr::new(bits, len)
}

fn unpack(n: u32, e: u32, r: WalkRepr) -> Result<(usize, Vec<usize>)> {
    if r.len < n || !(r.len - n).is_multiple_of(e.max(1)) || (e == 0 && r.len != n) {
        return Err(structural(format!("{} bits is not n + t*e for n={n}, e={e}", r.len)));
    }
    let t = (r.len - n).checked_div(e).unwrap_or(0);
    let labels = (0..t).map(|s| (r.bits >> (e * (t - 1 - s)) & mask(e)) as usize).collect();
    Ok(((r.bits >> (e * t)) as usize, labels))
}

/// `phi(y) = (y_0, j_1, ..., j_t)`.
pub fn forward_repr(g: &HybridGraph, w: &Walk) -> Result<WalkRepr> {
    let (n, e) = walk_layout(g)?;
    if !g.is_walk(w) {
        return Err(structural(format!("{w} is not a walk of the graph")));
    }
    pack(n, e, w.start(), w.labels().iter().copied())
}

/// `phi^{-1}`: replays the labels from the start vertex.
pub fn forward_inv(g: &HybridGraph, r: WalkRepr) -> Result<Walk> {
    let (n, e) = walk_layout(g)?;
    let (start, labels) = unpack(n, e, r)?;
    g.walk_from_labels(start, labels)
}

/// `rho(y) = (y_t, k_t, ..., k_1)` where `k_s` is the in-label of step `s`.
pub fn reverse_repr(g: &HybridGraph, w: &Walk) -> Result<WalkRepr> {
    let (n, e) = walk_layout(g)?;
    if !g.is_walk(w) {
        return Err(structural(format!("{w} is not a walk of the graph")));
    }
    let steps: Vec<usize> = (0..w.len()).map(|s| g.in_label(w.vertices()[s], w.labels()[s])).collect();
    pack(n, e, w.end(), steps.into_iter().rev())
}

/// `F' = rho o phi^{-1}` on `{0,1}^{n + t e}`.
pub fn walk_owp(g: &HybridGraph, t: u32) -> Result<ToyFunction> {
    let (n, e) = walk_layout(g)?;
    let len = n + t * e;
    check_bits(len, "walk representation")?;
    let table = (0..1u64 << len)
        .map(|x| {
            let w = forward_inv(g, WalkRepr::new(x, len)?)?;
            Ok(reverse_repr(g, &w)?.bits)
        })
        .collect::<Result<Vec<_>>>()?;
    ToyFunction::from_table(len, len, table)
}

/// `F'(x' z) = F(x') z` where `|x'|` is the largest schedule length `<= n_target`.
/// `f` must have that input length.
pub fn pad_extend(f: &ToyFunction, tau: &[u32], n_target: u32) -> Result<ToyFunction> {
    if tau.is_empty() || tau.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("length schedule must be non-empty and strictly increasing"));
    }
    let m = tau
        .iter()
        .rposition(|&l| l <= n_target)
        .ok_or_else(|| domain(format!("target length {n_target} is below the first schedule length {}", tau[0])))?;
    if f.n_in != tau[m] {
        return Err(domain(format!("function has input length {}, schedule selects {}", f.n_in, tau[m])));
    }
    let s = n_target - tau[m];
    check_bits(n_target, "padded input")?;
    check_bits(f.n_out + s, "padded output")?;
    let table = (0..1u64 << n_target).map(|x| f.eval(x >> s) << s | x & mask(s)).collect();
    ToyFunction::from_table(n_target, f.n_out + s, table)
}

/// Generator for query number `query` of an oracle seeded with `seed`.
pub fn oracle_rng(seed: u64, query: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(query);
    rng
}

/// A randomized partial inverter for [`Adversary::target`].
pub trait Adversary {
    fn target(&self) -> &Arc<ToyFunction>;

    /// One invocation on `y`. A returned `v` always satisfies `F(v) = y`.
    fn attempt(&mut self, y: u64) -> Option<u64>;

    /// Probability over the internal randomness that [`Adversary::attempt`] succeeds on `y`.
    fn success_at(&self, y: u64) -> f64;

    /// Modeled cost of one invocation: oracle queries plus evaluations of `F`.
    fn cost(&self) -> u64;

    /// Invocations so far.
    fn queries(&self) -> u64;
}

impl<A: Adversary + ?Sized> Adversary for Box<A> {
    fn target(&self) -> &Arc<ToyFunction> {
        (**self).target()
    }

    fn attempt(&mut self, y: u64) -> Option<u64> {
        (**self).attempt(y)
    }

    fn success_at(&self, y: u64) -> f64 {
        (**self).success_at(y)
    }

    fn cost(&self) -> u64 {
        (**self).cost()
    }

    fn queries(&self) -> u64 {
        (**self).queries()
    }
}

/// Succeeds on `y` with probability `profile[y]` and then returns the smallest preimage.
#[derive(Debug, Clone)]
pub struct PlantedOracle {
    f: Arc<ToyFunction>,
    profile: Vec<f64>,
    seed: u64,
    calls: u64,
    time_cost: u64,
}

impl PlantedOracle {
    pub fn new(f: Arc<ToyFunction>, profile: Vec<f64>, seed: u64) -> Result<Self> {
        if profile.len() != 1usize << f.n_out {
            return Err(structural(format!("profile has {} entries, expected 2^{}", profile.len(), f.n_out)));
        }
        if profile.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(domain("success probabilities must lie in [0, 1]"));
        }
        Ok(Self { f, profile, seed, calls: 0, time_cost: 1 })
    }

    /// Certain success on `points`, certain failure elsewhere.
    pub fn on_points(f: Arc<ToyFunction>, points: &[u64], seed: u64) -> Result<Self> {
        let mut profile = vec![0.0; 1usize << f.n_out];
        for &y in points {
            *profile.get_mut(y as usize).ok_or_else(|| structural(format!("point {y} out of range")))? = 1.0;
        }
        Self::new(f, profile, seed)
    }

    /// Certain success on `num/den` of the image points, chosen by `seed`.
    pub fn planted_fraction(f: Arc<ToyFunction>, num: u64, den: u64, seed: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(domain(format!("fraction {num}/{den} outside [0, 1]")));
        }
        let image: Vec<u64> = (0..1u64 << f.n_out).filter(|&y| f.smallest_preimage(y).is_some()).collect();
        let perm = Permutation::from_seed(image.len(), seed);
        let chosen: Vec<u64> = (0..image.len() as u64 * num / den).map(|i| image[perm.apply(i as usize)]).collect();
        Self::on_points(f, &chosen, seed)
    }

    pub fn with_time_cost(mut self, time_cost: u64) -> Self {
        self.time_cost = time_cost;
        self
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile
    }
}

impl Adversary for PlantedOracle {
    fn target(&self) -> &Arc<ToyFunction> {
        &self.f
    }

    fn attempt(&mut self, y: u64) -> Option<u64> {
        let mut rng = oracle_rng(self.seed, self.calls);
        self.calls += 1;
        let p = *self.profile.get(y as usize)?;
        let u: f64 = rng.random();
        if u < p {
            self.f.smallest_preimage(y)
        } else {
            None
        }
    }

    fn success_at(&self, y: u64) -> f64 {
        match self.f.smallest_preimage(y) {
            Some(_) => self.profile[y as usize],
            None => 0.0,
        }
    }

    fn cost(&self) -> u64 {
        self.time_cost
    }

    fn queries(&self) -> u64 {
        self.calls
    }
}

/// `1 - (1 - w)^k`.
pub fn amplify_profile<T: Scalar>(w: &T, k: u32) -> T {
    one::<T>() - ordered_product((0..k).map(|_| one::<T>() - w.clone()))
}

/// `(P{W > eps}, P{W' > 1 - (1 - eps)^k})` for a profile over equally likely points.
pub fn amplified_tails<T: Scalar>(profile: &[T], eps: &T, k: u32) -> (T, T) {
    let n = profile.len() as u64;
    let threshold = amplify_profile(eps, k);
    let before = profile.iter().filter(|w| *w > eps).count() as u64;
    let after = profile.iter().filter(|w| amplify_profile(*w, k) > threshold).count() as u64;
    (T::from_ratio(before, n), T::from_ratio(after, n))
}

/// Runs the inner adversary up to `k` times, returning the first verified answer.
#[derive(Debug, Clone)]
pub struct RepeatAmplify<A> {
    inner: A,
    k: u32,
    calls: u64,
}

pub fn repeat_amplify<A: Adversary>(inner: A, k: u32) -> Result<RepeatAmplify<A>> {
    if k == 0 {
        return Err(domain("k must be at least 1"));
    }
    Ok(RepeatAmplify { inner, k, calls: 0 })
}

impl<A> RepeatAmplify<A> {
    pub fn inner(&self) -> &A {
        &self.inner
    }
}

impl<A: Adversary> Adversary for RepeatAmplify<A> {
    fn target(&self) -> &Arc<ToyFunction> {
        self.inner.target()
    }

    fn attempt(&mut self, y: u64) -> Option<u64> {
        self.calls += 1;
        for _ in 0..self.k {
            if let Some(v) = self.inner.attempt(y) {
                if self.inner.target().eval(v) == y {
                    return Some(v);
                }
            }
        }
        None
    }

    fn success_at(&self, y: u64) -> f64 {
        amplify_profile(&self.inner.success_at(y), self.k)
    }

    fn cost(&self) -> u64 {
        self.k as u64 * (self.inner.cost() + 1)
    }

    fn queries(&self) -> u64 {
        self.calls
    }
}

/// Inverts a direct power block by block with one inner adversary.
#[derive(Debug, Clone)]
pub struct BlockwiseAdversary<A> {
    inner: A,
    target: Arc<ToyFunction>,
    t: u32,
    calls: u64,
}

pub fn blockwise<A: Adversary>(inner: A, t: u32) -> Result<BlockwiseAdversary<A>> {
    let target = Arc::new(direct_power(inner.target(), t)?);
    Ok(BlockwiseAdversary { inner, target, t, calls: 0 })
}

impl<A: Adversary> BlockwiseAdversary<A> {
    fn blocks(&self, y: u64) -> impl Iterator<Item = u64> + '_ {
        let n_out = self.inner.target().n_out;
        (0..self.t).map(move |b| y >> (n_out * (self.t - 1 - b)) & mask(n_out))
    }
}

impl<A: Adversary> Adversary for BlockwiseAdversary<A> {
    fn target(&self) -> &Arc<ToyFunction> {
        &self.target
    }

    fn attempt(&mut self, y: u64) -> Option<u64> {
        self.calls += 1;
        let n_in = self.inner.target().n_in;
        let blocks: Vec<u64> = self.blocks(y).collect();
        let mut x = 0u64;
        for yb in blocks {
            x = x << n_in | self.inner.attempt(yb)?;
        }
        Some(x)
    }

    fn success_at(&self, y: u64) -> f64 {
        self.blocks(y).map(|yb| self.inner.success_at(yb)).product()
    }

    fn cost(&self) -> u64 {
        self.t as u64 * self.inner.cost()
    }

    fn queries(&self) -> u64 {
        self.calls
    }
}

/// Inverter for `F` built from one for `direct_power(F, t)`: plant `y` at a
/// random block, fill the others with images of fresh inputs, query once,
/// verify every block.
#[derive(Debug, Clone)]
pub struct DirectReduction<A> {
    inner: A,
    f: Arc<ToyFunction>,
    t: u32,
    seed: u64,
    calls: u64,
}

pub fn reduce_direct<A: Adversary>(inner: A, f: Arc<ToyFunction>, t: u32, seed: u64) -> Result<DirectReduction<A>> {
    if t == 0 {
        return Err(domain("t must be at least 1"));
    }
    if inner.target().n_in != f.n_in * t || inner.target().n_out != f.n_out * t {
        return Err(structural("inner adversary does not attack the t-fold direct power"));
    }
    Ok(DirectReduction { inner, f, t, seed, calls: 0 })
}

impl<A> DirectReduction<A> {
    pub fn inner(&self) -> &A {
        &self.inner
    }
}

impl<A: Adversary> DirectReduction<A> {
    fn assemble(&self, images: &[u64]) -> u64 {
        images.iter().fold(0, |acc, &y| acc << self.f.n_out | y)
    }
}

impl<A: Adversary> Adversary for DirectReduction<A> {
    fn target(&self) -> &Arc<ToyFunction> {
        &self.f
    }

    fn attempt(&mut self, y: u64) -> Option<u64> {
        let mut rng = oracle_rng(self.seed, self.calls);
        self.calls += 1;
        let t = self.t as usize;
        let i = rng.random_range(0..t);
        let images: Vec<u64> = (0..t)
            .map(|j| if j == i { y } else { self.f.eval(rng.random_range(0..self.f.domain_size())) })
            .collect();
        let answer = self.inner.attempt(self.assemble(&images))?;
        let n_in = self.f.n_in;
        let blocks: Vec<u64> = (0..self.t).map(|b| answer >> (n_in * (self.t - 1 - b)) & mask(n_in)).collect();
        blocks.iter().zip(&images).all(|(&x, &yj)| self.f.eval(x) == yj).then_some(blocks[i])
    }

    fn success_at(&self, y: u64) -> f64 {
        let t = self.t as usize;
        let size = self.f.domain_size();
        let others = size.pow(self.t - 1);
        let mut total = 0.0;
        for i in 0..t {
            let mut sum = 0.0;
            for code in 0..others {
                let mut rest = code;
                let images: Vec<u64> = (0..t)
                    .map(|j| {
                        if j == i {
                            y
                        } else {
                            let x = rest % size;
                            rest /= size;
                            self.f.eval(x)
                        }
                    })
                    .collect();
                sum += self.inner.success_at(self.assemble(&images));
            }
            total += sum / others as f64;
        }
        total / t as f64
    }

    fn cost(&self) -> u64 {
        self.inner.cost() + 2 * self.t as u64 - 1
    }

    fn queries(&self) -> u64 {
        self.calls
    }
}

/// Inverter for `F` built from one for `walk_owp(g, t)`: place `y` at a
/// random position `1 <= i < t` of a random walk given by its reverse
/// representation, query once, decode and verify.
#[derive(Debug, Clone)]
pub struct WalkReduction<A> {
    inner: A,
    g: Arc<HybridGraph>,
    f: Arc<ToyFunction>,
    t: u32,
    layout: (u32, u32),
    seed: u64,
    calls: u64,
}

pub fn reduce_walk<A: Adversary>(inner: A, g: Arc<HybridGraph>, t: u32, seed: u64) -> Result<WalkReduction<A>> {
    if t < 2 {
        return Err(domain("the walk reduction needs t >= 2"));
    }
    let (n, e) = walk_layout(&g)?;
    if inner.target().n_in != n + t * e || !inner.target().is_permutation() {
        return Err(structural("inner adversary does not attack the walk permutation"));
    }
    let f = Arc::new(ToyFunction::from_permutation(g.permutation())?);
    Ok(WalkReduction { inner, g, f, t, layout: (n, e), seed, calls: 0 })
}

impl<A> WalkReduction<A> {
    pub fn inner(&self) -> &A {
        &self.inner
    }
}

impl<A: Adversary> WalkReduction<A> {
    /// Reverse representation of the walk with `y_i = y`, forward labels
    /// `fwd` from position `i`, and in-labels `back` for steps `i, ..., 1`.
    pub fn query_point(&self, y: usize, fwd: &[usize], back: &[usize]) -> u64 {
        let (n, e) = self.layout;
        let mut v = y;
        let mut in_labels = Vec::with_capacity(fwd.len());
        for &j in fwd {
            in_labels.push(self.g.in_label(v, j));
            v = self.g.step(v, j);
        }
        let labels = in_labels.into_iter().rev().chain(back.iter().copied());
        pack(n, e, v, labels).expect("labels fit the layout").bits
    }
}

impl<A: Adversary> Adversary for WalkReduction<A> {
    fn target(&self) -> &Arc<ToyFunction> {
        &self.f
    }

    fn attempt(&mut self, y: u64) -> Option<u64> {
        let mut rng = oracle_rng(self.seed, self.calls);
        self.calls += 1;
        let t = self.t as usize;
        let d = self.g.degree();
        let i = rng.random_range(1..t);
        let fwd: Vec<usize> = (0..t - i).map(|_| rng.random_range(0..d)).collect();
        let back: Vec<usize> = (0..i).map(|_| rng.random_range(0..d)).collect();
        let query = self.query_point(y as usize, &fwd, &back);
        let answer = self.inner.attempt(query)?;
        let len = self.layout.0 + self.t * self.layout.1;
        let w = forward_inv(&self.g, WalkRepr::new(answer, len).ok()?).ok()?;
        if reverse_repr(&self.g, &w).ok()?.bits != query {
            return None;
        }
        let v = self.g.rotation().neighbor(w.vertices()[i - 1], w.labels()[i - 1]) as u64;
        debug_assert_eq!(self.f.eval(v), y);
        Some(v)
    }

    fn success_at(&self, y: u64) -> f64 {
        let t = self.t as usize;
        let d = self.g.degree();
        let mut total = 0.0;
        for i in 1..t {
            let combos = d.pow(t as u32);
            let mut sum = 0.0;
            for code in 0..combos {
                let digits: Vec<usize> = (0..t).map(|s| code / d.pow(s as u32) % d).collect();
                sum += self.inner.success_at(self.query_point(y as usize, &digits[..t - i], &digits[t - i..]));
            }
            total += sum / combos as f64;
        }
        total / (t - 1) as f64
    }

    fn cost(&self) -> u64 {
        self.inner.cost() + 2 * self.t as u64 - 1
    }

    fn queries(&self) -> u64 {
        self.calls
    }
}

/// Inverts the walk permutation by walking back from the terminal vertex,
/// inverting `F` at each step with the inner adversary.
#[derive(Debug, Clone)]
pub struct WalkChainAdversary<A> {
    inner: A,
    g: Arc<HybridGraph>,
    target: Arc<ToyFunction>,
    t: u32,
    calls: u64,
}

pub fn walk_chain<A: Adversary>(inner: A, g: Arc<HybridGraph>, t: u32) -> Result<WalkChainAdversary<A>> {
    let base = ToyFunction::from_permutation(g.permutation())?;
    if **inner.target() != base {
        return Err(structural("inner adversary must attack the graph's permutation"));
    }
    let target = Arc::new(walk_owp(&g, t)?);
    Ok(WalkChainAdversary { inner, g, target, t, calls: 0 })
}

impl<A: Adversary> WalkChainAdversary<A> {
    /// Vertices `y_t, ..., y_1` whose preimages are needed, using `f` to invert.
    fn back_walk(&self, r: u64, mut invert: impl FnMut(u64) -> Option<u64>) -> Option<(usize, Vec<usize>, Vec<u64>)> {
        let (n, e) = walk_layout(&self.g).ok()?;
        let (end, in_labels) = unpack(n, e, WalkRepr::new(r, n + self.t * e).ok()?).ok()?;
        let mut w = end;
        let mut labels = Vec::with_capacity(in_labels.len());
        let mut points = Vec::with_capacity(in_labels.len());
        for k in in_labels {
            points.push(w as u64);
            let v = invert(w as u64)? as usize;
            let (u, j) = self.g.rotation().rotate(v, k);
            labels.push(j);
            w = u;
        }
        labels.reverse();
        Some((w, labels, points))
    }
}

impl<A: Adversary> Adversary for WalkChainAdversary<A> {
    fn target(&self) -> &Arc<ToyFunction> {
        &self.target
    }

    fn attempt(&mut self, r: u64) -> Option<u64> {
        self.calls += 1;
        let (n, e) = walk_layout(&self.g).ok()?;
        let (end, in_labels) = unpack(n, e, WalkRepr::new(r, n + self.t * e).ok()?).ok()?;
        let mut w = end;
        let mut labels = Vec::with_capacity(in_labels.len());
        for k in in_labels {
            let v = self.inner.attempt(w as u64)? as usize;
            let (u, j) = self.g.rotation().rotate(v, k);
            labels.push(j);
            w = u;
        }
        labels.reverse();
        Some(pack(n, e, w, labels.into_iter()).ok()?.bits)
    }

    fn success_at(&self, r: u64) -> f64 {
        let f = self.inner.target();
        match self.back_walk(r, |y| f.smallest_preimage(y)) {
            Some((_, _, points)) => points.iter().map(|&y| self.inner.success_at(y)).product(),
            None => 0.0,
        }
    }

    fn cost(&self) -> u64 {
        self.t as u64 * self.inner.cost()
    }

    fn queries(&self) -> u64 {
        self.calls
    }
}

/// Inverter for `F` from one for its padded extension: append random
/// suffix bits, query once, strip them.
#[derive(Debug, Clone)]
pub struct PadReduction<A> {
    inner: A,
    f: Arc<ToyFunction>,
    suffix: u32,
    seed: u64,
    calls: u64,
}

pub fn reduce_pad<A: Adversary>(inner: A, f: Arc<ToyFunction>, seed: u64) -> Result<PadReduction<A>> {
    let outer = inner.target();
    if outer.n_in < f.n_in || outer.n_out < f.n_out || outer.n_in - f.n_in != outer.n_out - f.n_out {
        return Err(structural("inner adversary does not attack a padded extension"));
    }
    let suffix = outer.n_in - f.n_in;
    Ok(PadReduction { inner, f, suffix, seed, calls: 0 })
}

impl<A: Adversary> Adversary for PadReduction<A> {
    fn target(&self) -> &Arc<ToyFunction> {
        &self.f
    }

    fn attempt(&mut self, y: u64) -> Option<u64> {
        let mut rng = oracle_rng(self.seed, self.calls);
        self.calls += 1;
        let z = rng.random_range(0..1u64 << self.suffix);
        let answer = self.inner.attempt(y << self.suffix | z)?;
        let x = answer >> self.suffix;
        (answer & mask(self.suffix) == z && self.f.eval(x) == y).then_some(x)
    }

    fn success_at(&self, y: u64) -> f64 {
        let count = 1u64 << self.suffix;
        (0..count).map(|z| self.inner.success_at(y << self.suffix | z)).sum::<f64>() / count as f64
    }

    fn cost(&self) -> u64 {
        self.inner.cost() + 1
    }

    fn queries(&self) -> u64 {
        self.calls
    }
}

/// `S = T / eps`; infinite when the success probability is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityEstimate {
    pub time_cost: f64,
    pub success: f64,
    pub security: f64,
    pub infinite: bool,
}

impl SecurityEstimate {
    pub fn new(time_cost: f64, success: f64) -> Self {
        if success > 0.0 {
            Self { time_cost, success, security: time_cost / success, infinite: false }
        } else {
            Self { time_cost, success, security: f64::INFINITY, infinite: true }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentMode {
    Exact,
    Montecarlo { trials: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionReport {
    pub success: f64,
    /// Success probability per output point, exact mode only.
    pub per_point: Option<Vec<f64>>,
    pub trials: u64,
    /// Answers `v` with `F(v) != y`.
    pub violations: u64,
    pub security: SecurityEstimate,
}

/// Success probability of `g` against `f` on uniformly random inputs.
pub fn measure_inversion(f: &ToyFunction, g: &mut dyn Adversary, mode: MeasureMode) -> Result<InversionReport> {
    if **g.target() != *f {
        return Err(structural("adversary attacks a different function"));
    }
    let size = f.domain_size();
    let (success, per_point, trials, violations) = match mode {
        MeasureMode::Exact => {
            let per_point: Vec<f64> = (0..1u64 << f.n_out).map(|y| g.success_at(y)).collect();
            let success = (0..size).map(|x| per_point[f.eval(x) as usize]).sum::<f64>() / size as f64;
            (success, Some(per_point), 0, 0)
        }
        MeasureMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(domain("Monte Carlo needs at least one trial"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut hits, mut bad) = (0u64, 0u64);
            for _ in 0..trials {
                let y = f.eval(rng.random_range(0..size));
                match g.attempt(y) {
                    Some(v) if v < size && f.eval(v) == y => hits += 1,
                    Some(_) => bad += 1,
                    None => {}
                }
            }
            (hits as f64 / trials as f64, None, trials, bad)
        }
    };
    let security = SecurityEstimate::new(g.cost() as f64, success);
    Ok(InversionReport { success, per_point, trials, violations, security })
}

/// Tail `P{W > eps}` of a success profile under the image distribution of `f`.
pub fn image_tail(f: &ToyFunction, profile: impl Fn(u64) -> f64, eps: f64) -> f64 {
    let size = f.domain_size();
    (0..size).filter(|&x| profile(f.eval(x)) > eps).count() as f64 / size as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub beta: f64,
    pub t: u32,
    pub grid_points: usize,
    /// Largest `(1 - beta x)^t - max(1 - (1 - 1/e) beta t x, 1/e)` on `x in [0, 1]`.
    pub max_envelope_excess: f64,
    /// Largest `(1 - beta delta/2)^t - max(1 - 2 delta, 1/2)` on `delta in [0.01, 0.5]`,
    /// checked only when `beta t >= 7`.
    pub max_dominance_excess: Option<f64>,
}

impl EnvelopeReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_envelope_excess <= tol && self.max_dominance_excess.is_none_or(|x| x <= tol)
    }
}

pub fn envelope_check(beta: f64, t: u32, grid_points: usize) -> Result<EnvelopeReport> {
    if !(beta > 0.0 && beta <= 1.0) || t == 0 {
        return Err(domain("envelope check needs 0 < beta <= 1 and t >= 1"));
    }
    if grid_points < 2 {
        return Err(domain("grid needs at least two points"));
    }
    let bt = beta * t as f64;
    let e_inv = (-1.0f64).exp();
    let grid = |lo: f64, hi: f64| (0..grid_points).map(move |i| lo + (hi - lo) * i as f64 / (grid_points - 1) as f64);
    let max_envelope_excess = grid(0.0, 1.0)
        .map(|x| (1.0 - beta * x).powi(t as i32) - (1.0 - (1.0 - e_inv) * bt * x).max(e_inv))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_dominance_excess = (bt >= 7.0).then(|| {
        grid(0.01, 0.5)
            .map(|dl| (1.0 - beta * dl / 2.0).powi(t as i32) - (1.0 - 2.0 * dl).max(0.5))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(EnvelopeReport { beta, t, grid_points, max_envelope_excess, max_dominance_excess })
}

/// `P{W > threshold} <= E[W] / threshold` for a profile over equally likely points.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovCheck<T> {
    pub tail: T,
    pub mean: T,
    pub bound: T,
}

impl<T: Scalar> MarkovCheck<T> {
    pub fn holds(&self) -> bool {
        self.tail <= self.bound
    }
}

pub fn markov_tail<T: Scalar>(profile: &[T], threshold: &T) -> Result<MarkovCheck<T>> {
    if profile.is_empty() || *threshold <= T::zero() {
        return Err(domain("need a non-empty profile and a positive threshold"));
    }
    let n = profile.len() as u64;
    let tail = T::from_ratio(profile.iter().filter(|w| *w > threshold).count() as u64, n);
    let mean = ordered_sum(profile.iter().cloned()) / T::from_usize(profile.len());
    let bound = mean.clone() / threshold.clone();
    Ok(MarkovCheck { tail, mean, bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    #[default]
    Direct,
    Walk,
}

/// Parameters of one amplification experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub construction: Construction,
    pub n: u32,
    pub t: u32,
    pub k: u32,
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
    pub mode: ExperimentMode,
    pub m: u32,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(domain(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.t == 0 || self.k == 0 {
            return Err(domain("t and k must be at least 1"));
        }
        if self.construction == Construction::Walk && self.t < 2 {
            return Err(domain("the walk construction needs t >= 2"));
        }
        if let ExperimentMode::Montecarlo { trials: 0 } = self.mode {
            return Err(domain("Monte Carlo needs at least one trial"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use crate::spectral::mgg_rotation;

    fn perm4(seed: u64) -> Arc<ToyFunction> {
        Arc::new(ToyFunction::random_permutation(4, seed).unwrap())
    }

    fn graph(seed: u64) -> HybridGraph {
        HybridGraph::new(mgg_rotation(2).unwrap(), Permutation::from_seed(16, seed)).unwrap()
    }

    #[test]
    fn table_validation() {
        assert!(ToyFunction::from_table(2, 2, vec![0, 1, 2]).is_err());
        assert!(ToyFunction::from_table(2, 1, vec![0, 1, 2, 1]).is_err());
        let f = ToyFunction::from_table(2, 2, vec![1, 1, 3, 0]).unwrap();
        assert!(!f.is_permutation());
        assert_eq!(f.smallest_preimage(1), Some(0));
        assert_eq!(f.smallest_preimage(2), None);
        assert!(matches!(ToyFunction::identity(TOY_BITS_LIMIT + 1), Err(Error::Resource { .. })));
    }

    #[test]
    fn direct_power_small_cases() {
        let f = perm4(1);
        assert_eq!(direct_power(&f, 1).unwrap(), *f);
        assert_eq!(direct_power(&ToyFunction::identity(2).unwrap(), 2).unwrap(), ToyFunction::identity(4).unwrap());
        let f2 = direct_power(&f, 2).unwrap();
        assert!(f2.is_permutation() && f2.check_bijective());
        assert_eq!(f2.eval(0x3a), f.eval(3) << 4 | f.eval(0xa));
    }

    #[test]
    fn walk_repr_golden_vector() {
        let g = graph(1);
        let w = g.walk_from_labels(5, vec![3, 0, 7]).unwrap();
        let r = forward_repr(&g, &w).unwrap();
        assert_eq!(r.len(), 13);
        assert_eq!(r.to_string(), "0101011000111");
        assert_eq!(forward_inv(&g, r).unwrap(), w);
        let bare = g.walk_from_labels(9, vec![]).unwrap();
        assert_eq!(forward_repr(&g, &bare).unwrap().to_string(), "1001");
        assert_eq!(reverse_repr(&g, &bare).unwrap().to_string(), "1001");
    }

    #[test]
    fn walk_owp_zero_steps_is_identity() {
        assert_eq!(walk_owp(&graph(2), 0).unwrap(), ToyFunction::identity(4).unwrap());
    }

    #[test]
    fn pad_extend_cases() {
        let f = perm4(3);
        assert_eq!(pad_extend(&f, &[4, 9], 4).unwrap(), *f);
        let p = pad_extend(&f, &[4, 9], 6).unwrap();
        assert!(p.check_bijective());
        assert_eq!(p.eval(0b10_1101), f.eval(0b1011) << 2 | 0b01);
        assert!(matches!(pad_extend(&f, &[4, 9], 3), Err(Error::Domain(_))));
        assert!(matches!(pad_extend(&f, &[4, 4], 6), Err(Error::Domain(_))));
    }

    #[test]
    fn amplify_half_twice() {
        assert_eq!(amplify_profile(&Exact::from_ratio(1, 2), 2), Exact::from_ratio(3, 4));
        assert_eq!(amplify_profile(&Exact::from_ratio(1, 3), 1), Exact::from_ratio(1, 3));
    }

    #[test]
    fn planted_fraction_is_exact() {
        let f = perm4(4);
        let g = PlantedOracle::planted_fraction(Arc::clone(&f), 3, 4, 9).unwrap();
        let r = measure_inversion(&f, &mut g.clone(), MeasureMode::Exact).unwrap();
        assert_eq!(r.success, 0.75);
        assert_eq!(r.security.time_cost, 1.0);
    }

    #[test]
    fn security_definition() {
        let s = SecurityEstimate::new(1000.0, 0.01);
        assert!((s.security - 100_000.0).abs() < 1e-9);
        let z = SecurityEstimate::new(5.0, 0.0);
        assert!(z.infinite && z.security.is_infinite());
        let f = perm4(5);
        let mut sure = PlantedOracle::new(Arc::clone(&f), vec![1.0; 16], 0).unwrap().with_time_cost(7);
        let r = measure_inversion(&f, &mut sure, MeasureMode::Exact).unwrap();
        assert_eq!((r.success, r.security.security), (1.0, 7.0));
    }

    #[test]
    fn envelope_endpoints() {
        let r = envelope_check(0.116, 61, 1000).unwrap();
        assert!(r.holds(1e-12));
        assert!(r.max_dominance_excess.is_some());
        assert!(envelope_check(0.5, 8, 1000).unwrap().max_dominance_excess.is_none());
        assert!(envelope_check(0.0, 8, 10).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig { construction: Construction::Direct, n: 4, t: 2, k: 1, delta: 0.25, eps: 0.1, seed: 1, mode: ExperimentMode::Exact, m: 2 };
        assert!(c.validate().is_ok());
        c.delta = 1.0;
        assert!(c.validate().is_err());
    }
}
