//! Rotation functions for explicit regular graph families, their transition
//! matrices, second-eigenvalue computation, and the projection-norm bounds
//! that drive beta-independence.
//!
//! Transition matrices are stored as exact integer multiplicities per row
//! (`entry = count / d`), so symmetry and stochasticity checks are exact and
//! the same matrix can be applied in any [`Scalar`].

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, structural, Error, Result};
use crate::perm::Permutation;
use crate::scalar::{Real, Scalar};

/// Largest vertex count handled by the dense eigen-solver.
pub const DENSE_EIGEN_LIMIT: usize = 1024;

/// Largest vertex count for which the exact operator norm is computed.
pub const EXACT_NORM_LIMIT: usize = 256;

pub const POWER_ITERATION_MAX: usize = 100_000;

pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-8;

/// Largest family index accepted by [`mgg_rotation`].
pub const MAX_FAMILY_INDEX: u32 = 12;

/// A rotation function `R(u, j) = (v, k)` for a `d`-regular graph, tabulated.
///
/// The `j`-th edge at `u` is the `k`-th edge at `v`. Loops and parallel edges
/// are allowed, each with its own label pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredRotation {
    family_index: Option<u32>,
    n: usize,
    d: usize,
    table: Vec<(u32, u8)>,
}

impl ColoredRotation {
    /// Tabulates `f` and checks ranges and the involution property.
    pub fn from_fn(n: usize, d: usize, f: impl Fn(usize, usize) -> (usize, usize)) -> Result<Self> {
        if n == 0 || d == 0 || d > 255 || n > u32::MAX as usize {
            return Err(domain(format!("unsupported graph size n={n}, d={d}")));
        }
        let mut table = Vec::with_capacity(n * d);
        for u in 0..n {
            for j in 0..d {
                let (v, k) = f(u, j);
                if v >= n || k >= d {
                    return Err(structural(format!("R({u},{j}) = ({v},{k}) out of range")));
                }
                table.push((v as u32, k as u8));
            }
        }
        let rot = Self { family_index: None, n, d, table };
        if let Some((u, j)) = rot.involution_failure() {
            return Err(structural(format!("rotation is not an involution at ({u},{j})")));
        }
        Ok(rot)
    }

    /// The complete graph `K_n` with `d = n - 1`.
    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain("complete graph needs at least two vertices"));
        }
        Self::from_fn(n, n - 1, |u, j| ((u + j + 1) % n, n - 2 - j))
    }

    /// Cayley graph of `(Z_2)^bits` with the given generators; label `j`
    /// is the XOR with `generators[j]`, which makes the rotation label-preserving.
    pub fn xor_cayley(bits: u32, generators: &[usize]) -> Result<Self> {
        let n = 1usize << bits;
        Self::from_fn(n, generators.len(), |u, j| (u ^ generators[j], j))
    }

    #[inline]
    pub fn rotate(&self, u: usize, j: usize) -> (usize, usize) {
        let (v, k) = self.table[u * self.d + j];
        (v as usize, k as usize)
    }

    #[inline]
    pub fn neighbor(&self, u: usize, j: usize) -> usize {
        self.table[u * self.d + j].0 as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn family_index(&self) -> Option<u32> {
        self.family_index
    }

    /// `log2 N` when `N` is a power of two.
    pub fn vertex_bits(&self) -> Option<u32> {
        self.n.is_power_of_two().then(|| self.n.trailing_zeros())
    }

    /// `log2 d` when `d` is a power of two.
    pub fn label_bits(&self) -> Option<u32> {
        self.d.is_power_of_two().then(|| self.d.trailing_zeros())
    }

    /// First `(u, j)` with `R(R(u, j)) != (u, j)`, if any.
    pub fn involution_failure(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| (0..self.d).map(move |j| (u, j)))
            .find(|&(u, j)| {
                let (v, k) = self.rotate(u, j);
                self.rotate(v, k) != (u, j)
            })
    }

    /// Adjacency list, one line per vertex: `u: v0 v1 ... v_{d-1}` in label order.
    pub fn adjacency_list(&self) -> String {
        let mut out = String::with_capacity(self.n * (self.d * 6 + 8));
        for u in 0..self.n {
            let _ = write!(out, "{u}:");
            for j in 0..self.d {
                let _ = write!(out, " {}", self.neighbor(u, j));
            }
            out.push('\n');
        }
        out
    }
}

/// Parses the adjacency-list format written by [`ColoredRotation::adjacency_list`].
pub fn parse_adjacency_list(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| structural(format!("line {}: missing ':'", lineno + 1)))?;
        let u: usize = head
            .trim()
            .parse()
            .map_err(|e| structural(format!("line {}: bad vertex: {e}", lineno + 1)))?;
        if u != rows.len() {
            return Err(structural(format!("line {}: expected vertex {}, found {u}", lineno + 1, rows.len())));
        }
        let nbrs = tail
            .split_whitespace()
            .map(|s| s.parse().map_err(|e| structural(format!("line {}: bad neighbor: {e}", lineno + 1))))
            .collect::<Result<Vec<usize>>>()?;
        rows.push(nbrs);
    }
    Ok(rows)
}

/// Rotation function of the 8-regular Gabber–Galil graph on `Z_M x Z_M`,
/// `M = 2^m`.
///
/// Vertex `(x, y)` is packed as `x * M + y`. Labels, in order:
///
/// | label | neighbor          | paired label |
/// |-------|-------------------|--------------|
/// | 0     | `(x + 2y, y)`     | 1            |
/// | 1     | `(x - 2y, y)`     | 0            |
/// | 2     | `(x + 2y + 1, y)` | 3            |
/// | 3     | `(x - 2y - 1, y)` | 2            |
/// | 4     | `(x, y + 2x)`     | 5            |
/// | 5     | `(x, y - 2x)`     | 4            |
/// | 6     | `(x, y + 2x + 1)` | 7            |
/// | 7     | `(x, y - 2x - 1)` | 6            |
///
/// Each map's inverse is the map with the paired label, so `R(u, j)` returns
/// the paired label at the neighbor.
pub fn mgg_rotation(m: u32) -> Result<ColoredRotation> {
    if m == 0 || m > MAX_FAMILY_INDEX {
        return Err(domain(format!("family index must lie in 1..={MAX_FAMILY_INDEX}, got {m}")));
    }
    let side = 1usize << m;
    let mask = side - 1;
    let n = side * side;
    let mut table = Vec::with_capacity(n * 8);
    for x in 0..side {
        for y in 0..side {
            let nbrs = [
                ((x + 2 * y) & mask, y),
                ((x.wrapping_sub(2 * y)) & mask, y),
                ((x + 2 * y + 1) & mask, y),
                ((x.wrapping_sub(2 * y + 1)) & mask, y),
                (x, (y + 2 * x) & mask),
                (x, (y.wrapping_sub(2 * x)) & mask),
                (x, (y + 2 * x + 1) & mask),
                (x, (y.wrapping_sub(2 * x + 1)) & mask),
            ];
            for (j, (a, b)) in nbrs.into_iter().enumerate() {
                table.push(((a * side + b) as u32, (j ^ 1) as u8));
            }
        }
    }
    Ok(ColoredRotation { family_index: Some(m), n, d: 8, table })
}

/// Returns the edge coloring when the rotation is label-preserving
/// (`R(u, j) = (v, j)` everywhere), otherwise `None`.
pub fn edge_coloring(rot: &ColoredRotation) -> Option<EdgeColoring> {
    let preserving = (0..rot.n).all(|u| (0..rot.d).all(|j| rot.rotate(u, j).1 == j));
    preserving.then(|| EdgeColoring { d: rot.d, neighbors: rot.table.iter().map(|&(v, _)| v).collect() })
}

/// An edge coloring with `d` colors: color `j` at `u` leads to `color_target(u, j)`,
/// and the same edge has color `j` at the other endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    d: usize,
    neighbors: Vec<u32>,
}

impl EdgeColoring {
    pub fn colors(&self) -> usize {
        self.d
    }

    pub fn color_target(&self, u: usize, color: usize) -> usize {
        self.neighbors[u * self.d + color] as usize
    }

    /// Smallest color of an edge between `u` and `v`.
    pub fn color_between(&self, u: usize, v: usize) -> Option<usize> {
        (0..self.d).find(|&c| self.color_target(u, c) == v)
    }

    /// Colors of the edges incident to `u`, one per edge.
    pub fn colors_at(&self, _u: usize) -> Vec<usize> {
        (0..self.d).collect()
    }

    /// True when every edge has the same color seen from both endpoints.
    pub fn is_consistent(&self) -> bool {
        let n = self.neighbors.len() / self.d;
        (0..n).all(|u| (0..self.d).all(|c| self.color_target(self.color_target(u, c), c) == u))
    }
}

/// Sparse multiplicity storage shared by both transition-matrix types.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CountRows {
    n: usize,
    d: usize,
    rows: Vec<Vec<(u32, u32)>>,
}

impl CountRows {
    fn count(&self, i: usize, j: usize) -> u32 {
        self.rows[i]
            .binary_search_by_key(&(j as u32), |&(c, _)| c)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0)
    }

    fn entry<T: Scalar>(&self, i: usize, j: usize) -> T {
        T::from_ratio(self.count(i, j) as u64, self.d as u64)
    }

    fn to_dense<T: Real>(&self) -> DMatrix<T> {
        let dd = <T as Scalar>::from_usize(self.d);
        DMatrix::from_fn(self.n, self.n, |i, j| <T as Scalar>::from_usize(self.count(i, j) as usize) / dd)
    }

    fn mul_vec<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_dim(v.len())?;
        let dd = <T as Scalar>::from_usize(self.d);
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let acc = row.iter().fold(T::zero(), |acc, &(c, k)| acc + <T as Scalar>::from_usize(k as usize) * v[c as usize].clone());
                acc / dd.clone()
            })
            .collect())
    }

    fn vec_mul<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_dim(v.len())?;
        let mut out = vec![T::zero(); self.n];
        for (i, row) in self.rows.iter().enumerate() {
            if v[i] == T::zero() {
                continue;
            }
            for &(c, k) in row {
                let c = c as usize;
                out[c] = out[c].clone() + <T as Scalar>::from_usize(k as usize) * v[i].clone();
            }
        }
        let dd = <T as Scalar>::from_usize(self.d);
        Ok(out.into_iter().map(|x| x / dd.clone()).collect())
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(structural(format!("vector of length {len} against a {n}x{n} matrix", n = self.n)));
        }
        Ok(())
    }

    fn row_sums_exact(&self) -> bool {
        self.rows.iter().all(|r| r.iter().map(|&(_, k)| k as usize).sum::<usize>() == self.d)
    }

    fn column_sums_exact(&self) -> bool {
        let mut col = vec![0usize; self.n];
        for row in &self.rows {
            for &(c, k) in row {
                col[c as usize] += k as usize;
            }
        }
        col.iter().all(|&s| s == self.d)
    }
}

/// Transition matrix of an undirected `d`-regular graph: `a_uv = (#labels u -> v) / d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    inner: CountRows,
}

pub fn transition_matrix(rot: &ColoredRotation) -> TransitionMatrix {
    let rows = (0..rot.n)
        .map(|u| {
            let mut row: Vec<(u32, u32)> = Vec::with_capacity(rot.d);
            let mut targets: Vec<u32> = (0..rot.d).map(|j| rot.neighbor(u, j) as u32).collect();
            targets.sort_unstable();
            for v in targets {
                match row.last_mut() {
                    Some((c, k)) if *c == v => *k += 1,
                    _ => row.push((v, 1)),
                }
            }
            row
        })
        .collect();
    TransitionMatrix { inner: CountRows { n: rot.n, d: rot.d, rows } }
}

impl TransitionMatrix {
    /// Builds a matrix from explicit multiplicity rows. Each row's counts must sum to `d`.
    pub fn from_counts(d: usize, rows: Vec<Vec<(usize, u32)>>) -> Result<Self> {
        let n = rows.len();
        let mut out = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            let mut r: Vec<(u32, u32)> = row.into_iter().filter(|&(_, k)| k > 0).map(|(c, k)| (c as u32, k)).collect();
            r.sort_unstable();
            if r.windows(2).any(|w| w[0].0 == w[1].0) || r.iter().any(|&(c, _)| c as usize >= n) {
                return Err(structural(format!("row {i} has duplicate or out-of-range columns")));
            }
            out.push(r);
        }
        let inner = CountRows { n, d, rows: out };
        if !inner.row_sums_exact() {
            return Err(structural("row counts must sum to d"));
        }
        Ok(Self { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.n
    }

    pub fn degree(&self) -> usize {
        self.inner.d
    }

    /// Number of labels from `i` landing on `j`.
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.inner.count(i, j)
    }

    pub fn entry<T: Scalar>(&self, i: usize, j: usize) -> T {
        self.inner.entry(i, j)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.inner.rows[i].iter().map(|&(c, k)| (c as usize, k))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.inner.n).all(|i| self.row(i).all(|(j, k)| self.count(j, i) == k))
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.inner.row_sums_exact() && self.inner.column_sums_exact()
    }

    pub fn to_dense<T: Real>(&self) -> DMatrix<T> {
        self.inner.to_dense()
    }

    /// `A v` for a column vector.
    pub fn mul_vec<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        self.inner.mul_vec(v)
    }

    /// `v A` for a row vector.
    pub fn vec_mul<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        self.inner.vec_mul(v)
    }

    /// `(connected, bipartite)` from a breadth-first 2-coloring.
    pub fn connectivity(&self) -> (bool, bool) {
        let n = self.inner.n;
        let mut side = vec![u8::MAX; n];
        let mut queue = VecDeque::from([0usize]);
        side[0] = 0;
        let mut seen = 1;
        let mut bipartite = true;
        while let Some(u) = queue.pop_front() {
            for (v, _) in self.row(u) {
                if side[v] == u8::MAX {
                    side[v] = 1 - side[u];
                    seen += 1;
                    queue.push_back(v);
                } else if side[v] == side[u] {
                    bipartite = false;
                }
            }
        }
        (seen == n, bipartite)
    }
}

/// Transition matrix `A' = A B` of the directed graph with edges `(u, F(v))`.
/// Row- and column-stochastic but in general not symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedTransitionMatrix {
    inner: CountRows,
}

/// `A' = A B` where `B` is the permutation matrix of `f` (`B_ij = 1` iff `f(i) = j`).
pub fn compose_permutation(a: &TransitionMatrix, f: &Permutation) -> Result<DirectedTransitionMatrix> {
    if f.len() != a.dim() {
        return Err(structural(format!("permutation on {} points for a {}-vertex graph", f.len(), a.dim())));
    }
    let rows = a
        .inner
        .rows
        .iter()
        .map(|row| {
            let mut r: Vec<(u32, u32)> = row.iter().map(|&(c, k)| (f.apply(c as usize) as u32, k)).collect();
            r.sort_unstable();
            r
        })
        .collect();
    Ok(DirectedTransitionMatrix { inner: CountRows { n: a.inner.n, d: a.inner.d, rows } })
}

/// Like [`compose_permutation`] but takes a raw table and validates it.
pub fn compose_permutation_table(a: &TransitionMatrix, table: Vec<usize>) -> Result<DirectedTransitionMatrix> {
    compose_permutation(a, &Permutation::new(table)?)
}

impl DirectedTransitionMatrix {
    pub fn dim(&self) -> usize {
        self.inner.n
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.inner.count(i, j)
    }

    pub fn entry<T: Scalar>(&self, i: usize, j: usize) -> T {
        self.inner.entry(i, j)
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.inner.row_sums_exact() && self.inner.column_sums_exact()
    }

    pub fn to_dense<T: Real>(&self) -> DMatrix<T> {
        self.inner.to_dense()
    }

    pub fn mul_vec<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        self.inner.mul_vec(v)
    }

    /// One step of the walk distribution: `v A'`.
    pub fn vec_mul<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        self.inner.vec_mul(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMethod {
    FullEigensolve,
    PowerIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport<T> {
    /// `max(|lambda_1|, |lambda_{N-1}|)`.
    pub alpha: T,
    /// `1 - alpha`.
    pub beta: T,
    pub lambda_1: T,
    pub lambda_min: T,
    pub method: SpectralMethod,
    pub iterations: usize,
    pub tolerance: T,
}

/// Second largest eigenvalue magnitude of a symmetric doubly stochastic matrix.
///
/// Uses a dense symmetric eigensolve up to [`DENSE_EIGEN_LIMIT`] vertices and
/// deflated, shifted power iteration beyond. Disconnected or bipartite graphs
/// are rejected since `alpha` would be 1.
pub fn second_eigenvalue_magnitude<T: Real>(a: &TransitionMatrix, tol: T) -> Result<SpectralReport<T>> {
    if !a.is_symmetric() || !a.is_doubly_stochastic() {
        return Err(Error::Precondition("matrix must be symmetric and doubly stochastic".into()));
    }
    let (connected, bipartite) = a.connectivity();
    if !connected {
        return Err(structural("graph is disconnected"));
    }
    if bipartite {
        return Err(structural("graph is bipartite"));
    }
    if a.dim() <= DENSE_EIGEN_LIMIT {
        Ok(full_eigensolve(a, tol))
    } else {
        power_iteration(a, tol)
    }
}

/// Dense symmetric eigensolve; no connectivity checks.
pub fn full_eigensolve<T: Real>(a: &TransitionMatrix, tol: T) -> SpectralReport<T> {
    let n = a.dim();
    let eig = SymmetricEigen::new(a.to_dense::<T>());
    let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    let lambda_1 = if n > 1 { vals[1] } else { T::zero() };
    let lambda_min = vals[n - 1];
    let alpha = if n > 1 { lambda_1.abs().max(lambda_min.abs()) } else { T::zero() };
    SpectralReport {
        alpha,
        beta: T::one() - alpha,
        lambda_1,
        lambda_min,
        method: SpectralMethod::FullEigensolve,
        iterations: 0,
        tolerance: tol,
    }
}

/// `lambda_1` from `(I + A)/2` and `lambda_min` from `(I - A)/2`, both
/// restricted to the complement of the all-ones vector.
pub fn power_iteration<T: Real>(a: &TransitionMatrix, tol: T) -> Result<SpectralReport<T>> {
    let half = T::from_ratio(1, 2);
    let two = <T as Scalar>::from_usize(2);
    let (top, it_top) = deflated_top_eigenvalue(a, |v, av| v * half + av * half, tol / two)?;
    let (bottom, it_bottom) = deflated_top_eigenvalue(a, |v, av| v * half - av * half, tol / two)?;
    let lambda_1 = two * top - T::one();
    let lambda_min = T::one() - two * bottom;
    let alpha = lambda_1.abs().max(lambda_min.abs());
    Ok(SpectralReport {
        alpha,
        beta: T::one() - alpha,
        lambda_1,
        lambda_min,
        method: SpectralMethod::PowerIteration,
        iterations: it_top + it_bottom,
        tolerance: tol,
    })
}

fn deflate<T: Real>(v: &mut [T]) {
    let mean = v.iter().copied().fold(T::zero(), |s, x| s + x) / <T as Scalar>::from_usize(v.len());
    v.iter_mut().for_each(|x| *x -= mean);
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

/// Top eigenvalue of `combine(I, A)` on the ones-complement, stopping when
/// the residual `|Bx - theta x|` drops below `tol`.
fn deflated_top_eigenvalue<T: Real>(a: &TransitionMatrix, combine: impl Fn(T, T) -> T, tol: T) -> Result<(T, usize)> {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<T> = (0..n).map(|_| <T as Scalar>::from_f64(rng.sample::<f64, _>(StandardNormal))).collect();
    deflate(&mut x);
    let nx = norm(&x);
    x.iter_mut().for_each(|e| *e /= nx);
    for it in 1..=POWER_ITERATION_MAX {
        let ax = a.mul_vec(&x)?;
        let mut bx: Vec<T> = x.iter().zip(&ax).map(|(&v, &av)| combine(v, av)).collect();
        deflate(&mut bx);
        let theta = x.iter().zip(&bx).fold(T::zero(), |s, (&p, &q)| s + p * q);
        let residual = norm(&x.iter().zip(&bx).map(|(&p, &q)| q - theta * p).collect::<Vec<_>>());
        let nb = norm(&bx);
        if residual <= tol || nb == T::zero() {
            return Ok((theta, it));
        }
        x = bx.into_iter().map(|e| e / nb).collect();
    }
    Err(Error::Resource { what: "power iteration did not converge".into(), budget: POWER_ITERATION_MAX as u64 })
}

/// Diagonal 0/1 projection onto a vertex subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    members: Vec<bool>,
    size: usize,
}

impl Projection {
    pub fn from_members(members: Vec<bool>) -> Self {
        let size = members.iter().filter(|&&b| b).count();
        Self { members, size }
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members = vec![false; n];
        for i in indices {
            *members.get_mut(i).ok_or_else(|| structural(format!("vertex {i} outside 0..{n}")))? = true;
        }
        Ok(Self::from_members(members))
    }

    /// Bit `i` of `mask` selects vertex `i`; requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self::from_members((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn full(n: usize) -> Self {
        Self { members: vec![true; n], size: n }
    }

    pub fn empty(n: usize) -> Self {
        Self { members: vec![false; n], size: 0 }
    }

    /// Each vertex included independently with probability 1/2.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_members((0..n).map(|_| rng.random::<bool>()).collect())
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i]).collect()
    }

    /// `|S| / N`.
    pub fn mu<T: Scalar>(&self) -> T {
        T::from_ratio(self.size as u64, self.members.len() as u64)
    }

    /// Projection onto `F^{-1}[S]`.
    pub fn preimage(&self, f: &Permutation) -> Self {
        Self::from_members(f.preimage_mask(&self.members))
    }

    pub fn apply<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.members.len() {
            return Err(structural(format!("vector of length {} against projection on {}", v.len(), self.members.len())));
        }
        Ok(v.iter().zip(&self.members).map(|(x, &keep)| if keep { x.clone() } else { T::zero() }).collect())
    }

    pub fn apply_in_place<T: Scalar>(&self, v: &mut [T]) {
        for (x, &keep) in v.iter_mut().zip(&self.members) {
            if !keep {
                *x = T::zero();
            }
        }
    }
}

/// Free-function form of [`Projection::apply`].
pub fn projection_apply<T: Scalar>(s: &Projection, v: &[T]) -> Result<Vec<T>> {
    s.apply(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBoundReport {
    /// Largest `|P A P' v| / ((alpha + beta mu)^{1/2} (alpha + beta mu')^{1/2} |v|)` over sampled `v`.
    pub max_ratio: f64,
    /// Same ratio for the operator norm itself, when computed.
    pub exact_ratio: Option<f64>,
    pub rhs_factor: f64,
    pub trials: usize,
}

impl NormBoundReport {
    pub fn holds(&self) -> bool {
        let tol = 1.0 + crate::prob::HOLD_TOLERANCE;
        self.max_ratio <= tol && self.exact_ratio.is_none_or(|r| r <= tol)
    }
}

fn rhs_factor<T: Real>(alpha: T, s: &Projection, s2: &Projection) -> T {
    let beta = T::one() - alpha;
    ((alpha + beta * s.mu::<T>()) * (alpha + beta * s2.mu::<T>())).sqrt()
}

fn ratio<T: Real>(lhs: T, rhs: T) -> f64 {
    if lhs == T::zero() {
        0.0
    } else if rhs == T::zero() {
        f64::INFINITY
    } else {
        (lhs / rhs).to_f64()
    }
}

fn gaussian_vector<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n).map(|_| <T as Scalar>::from_f64(rng.sample::<f64, _>(StandardNormal))).collect()
}

fn exact_norm<T: Real>(m: DMatrix<T>) -> T {
    m.singular_values().iter().copied().fold(T::zero(), |a, b| a.max(b))
}

/// Samples `|P A P' v|` against `(alpha + beta mu)^{1/2} (alpha + beta mu')^{1/2} |v|`
/// and, for small graphs, compares the exact operator norm of `P A P'` too.
pub fn check_lemma3<T: Real>(
    a: &TransitionMatrix,
    alpha: T,
    s: &Projection,
    s2: &Projection,
    trials: usize,
    seed: u64,
) -> Result<NormBoundReport> {
    let n = a.dim();
    if s.dim() != n || s2.dim() != n {
        return Err(structural("projection dimension does not match the matrix"));
    }
    let factor = rhs_factor(alpha, s, s2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v: Vec<T> = gaussian_vector(n, &mut rng);
        let w = s.apply(&a.mul_vec(&s2.apply(&v)?)?)?;
        worst = worst.max(ratio(norm(&w), factor * norm(&v)));
    }
    let exact_ratio = (n <= EXACT_NORM_LIMIT).then(|| {
        let m = DMatrix::from_fn(n, n, |i, j| {
            if s.contains(i) && s2.contains(j) {
                a.entry::<T>(i, j)
            } else {
                T::zero()
            }
        });
        ratio(exact_norm(m), factor)
    });
    Ok(NormBoundReport { max_ratio: worst, exact_ratio, rhs_factor: factor.to_f64(), trials })
}

/// Row-vector form for the directed matrix: `|v P A' P'|` against the same factor.
pub fn check_corollary1<T: Real>(
    a_prime: &DirectedTransitionMatrix,
    alpha: T,
    s: &Projection,
    s2: &Projection,
    trials: usize,
    seed: u64,
) -> Result<NormBoundReport> {
    let n = a_prime.dim();
    if s.dim() != n || s2.dim() != n {
        return Err(structural("projection dimension does not match the matrix"));
    }
    let factor = rhs_factor(alpha, s, s2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v: Vec<T> = gaussian_vector(n, &mut rng);
        let w = s2.apply(&a_prime.vec_mul(&s.apply(&v)?)?)?;
        worst = worst.max(ratio(norm(&w), factor * norm(&v)));
    }
    let exact_ratio = (n <= EXACT_NORM_LIMIT).then(|| {
        let m = DMatrix::from_fn(n, n, |i, j| {
            if s.contains(i) && s2.contains(j) {
                a_prime.entry::<T>(i, j)
            } else {
                T::zero()
            }
        });
        ratio(exact_norm(m), factor)
    });
    Ok(NormBoundReport { max_ratio: worst, exact_ratio, rhs_factor: factor.to_f64(), trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    #[test]
    fn gabber_galil_is_an_involution() {
        for m in 1..=4 {
            let rot = mgg_rotation(m).unwrap();
            assert_eq!(rot.involution_failure(), None, "m = {m}");
        }
        let rot = mgg_rotation(2).unwrap();
        assert_eq!((rot.vertex_count(), rot.degree()), (16, 8));
        assert_eq!(rot.vertex_bits(), Some(4));
        assert_eq!(rot.label_bits(), Some(3));
    }

    #[test]
    fn gabber_galil_golden_rotation() {
        // m = 2, u = (x, y) = (1, 0) packed as 4.
        let rot = mgg_rotation(2).unwrap();
        let got: Vec<(usize, usize)> = (0..8).map(|j| rot.rotate(4, j)).collect();
        assert_eq!(got, vec![(4, 1), (4, 0), (8, 3), (0, 2), (6, 5), (6, 4), (7, 7), (5, 6)]);
    }

    #[test]
    fn family_index_bounds() {
        assert!(mgg_rotation(0).is_err());
        assert!(mgg_rotation(MAX_FAMILY_INDEX + 1).is_err());
    }

    #[test]
    fn from_fn_rejects_non_involutions() {
        let err = ColoredRotation::from_fn(4, 1, |u, _| ((u + 1) % 4, 0)).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn transition_matrix_is_symmetric_doubly_stochastic() {
        let a = transition_matrix(&mgg_rotation(2).unwrap());
        assert!(a.is_symmetric());
        assert!(a.is_doubly_stochastic());
        let ones = vec![Exact::from_ratio(1, 1); 16];
        assert_eq!(a.mul_vec(&ones).unwrap(), ones);
    }

    #[test]
    fn complete_graph_alpha() {
        for n in [3, 4, 5, 8] {
            let a = transition_matrix(&ColoredRotation::complete(n).unwrap());
            let r = second_eigenvalue_magnitude::<f64>(&a, 1e-10).unwrap();
            assert!((r.alpha - 1.0 / (n as f64 - 1.0)).abs() < 1e-10, "n = {n}");
            assert_eq!(r.beta, 1.0 - r.alpha);
        }
    }

    #[test]
    fn lazy_uniform_matrix_alpha_half() {
        // 1/2 I + 1/2 J/4 with d = 8: diagonal 5/8, off-diagonal 1/8.
        let rows = (0..4).map(|i| (0..4).map(|j| (j, if i == j { 5 } else { 1 })).collect()).collect();
        let a = TransitionMatrix::from_counts(8, rows).unwrap();
        let r = second_eigenvalue_magnitude::<f64>(&a, 1e-10).unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bipartite_and_disconnected_inputs_are_rejected() {
        let cube = transition_matrix(&ColoredRotation::xor_cayley(3, &[1, 2, 4]).unwrap());
        assert!(matches!(second_eigenvalue_magnitude::<f64>(&cube, 1e-8), Err(Error::Structural(_))));
        let split = transition_matrix(&ColoredRotation::xor_cayley(2, &[1]).unwrap());
        assert!(matches!(second_eigenvalue_magnitude::<f64>(&split, 1e-8), Err(Error::Structural(_))));
    }

    #[test]
    fn power_iteration_agrees_with_dense_solver() {
        for m in [2, 3] {
            let a = transition_matrix(&mgg_rotation(m).unwrap());
            let dense = full_eigensolve::<f64>(&a, 1e-9);
            let power = power_iteration::<f64>(&a, 1e-9).unwrap();
            assert!((dense.alpha - power.alpha).abs() < 1e-6, "m = {m}");
            assert!((dense.lambda_min - power.lambda_min).abs() < 1e-6, "m = {m}");
        }
    }

    #[test]
    fn f32_solver_runs() {
        let a = transition_matrix(&ColoredRotation::complete(4).unwrap());
        let r = second_eigenvalue_magnitude::<f32>(&a, 1e-5).unwrap();
        assert!((r.alpha - 1.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn projection_basics() {
        let v = vec![1.0, 2.0, 3.0];
        assert_eq!(projection_apply(&Projection::full(3), &v).unwrap(), v);
        assert_eq!(projection_apply(&Projection::empty(3), &v).unwrap(), vec![0.0; 3]);
        assert!(projection_apply(&Projection::full(4), &v).is_err());
        let p = Projection::from_mask(16, 0b1011_0000_0000_0001);
        assert_eq!(p.mu::<Exact>(), Exact::from_ratio(4, 16));
    }

    #[test]
    fn norm_bound_trivial_cases() {
        let a = transition_matrix(&mgg_rotation(2).unwrap());
        let alpha = full_eigensolve::<f64>(&a, 1e-10).alpha;
        let full = check_lemma3(&a, alpha, &Projection::full(16), &Projection::full(16), 50, 1).unwrap();
        assert!(full.holds());
        assert!((full.rhs_factor - 1.0).abs() < 1e-15);
        assert!((full.exact_ratio.unwrap() - 1.0).abs() < 1e-9);
        let none = check_lemma3(&a, alpha, &Projection::full(16), &Projection::empty(16), 50, 1).unwrap();
        assert_eq!(none.max_ratio, 0.0);
    }

    #[test]
    fn compose_with_identity_is_noop() {
        let a = transition_matrix(&mgg_rotation(2).unwrap());
        let ap = compose_permutation(&a, &Permutation::identity(16)).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(ap.count(i, j), a.count(i, j));
            }
        }
        assert!(compose_permutation_table(&a, vec![0; 16]).is_err());
    }

    #[test]
    fn composed_matrix_columns_sum_to_one() {
        let a = transition_matrix(&mgg_rotation(2).unwrap());
        let ap = compose_permutation(&a, &Permutation::from_seed(16, 5)).unwrap();
        assert!(ap.is_doubly_stochastic());
        let ones = vec![Exact::from_ratio(1, 1); 16];
        assert_eq!(ap.vec_mul(&ones).unwrap(), ones);
    }

    #[test]
    fn coloring_present_for_label_preserving_rotation() {
        let k4 = ColoredRotation::xor_cayley(2, &[1, 2, 3]).unwrap();
        let c = edge_coloring(&k4).expect("xor Cayley graphs are label preserving");
        assert!(c.is_consistent());
        for u in 0..4 {
            let mut colors = c.colors_at(u);
            colors.dedup();
            assert_eq!(colors.len(), 3);
            for v in (0..4).filter(|&v| v != u) {
                assert_eq!(c.color_between(u, v), Some((u ^ v) - 1));
            }
        }
    }

    #[test]
    fn gabber_galil_has_no_label_preserving_coloring() {
        assert!(edge_coloring(&mgg_rotation(2).unwrap()).is_none());
    }

    #[test]
    fn adjacency_list_round_trip() {
        let rot = mgg_rotation(2).unwrap();
        let text = rot.adjacency_list();
        assert!(text.starts_with("0: 0 0 4 12 0 0 1 3\n"));
        let rows = parse_adjacency_list(&text).unwrap();
        assert_eq!(rows.len(), 16);
        for (u, row) in rows.iter().enumerate() {
            assert_eq!(row, &(0..8).map(|j| rot.neighbor(u, j)).collect::<Vec<_>>());
        }
        assert!(parse_adjacency_list("0 1 2").is_err());
    }
}
