//! Permutations of `{0, .., n-1}` stored with their inverse table.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{structural, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &v) in forward.iter().enumerate() {
            if v >= n {
                return Err(structural(format!("image {v} of {i} is outside 0..{n}")));
            }
            if inverse[v] != usize::MAX {
                return Err(structural(format!("{v} has two preimages ({} and {i})", inverse[v])));
            }
            inverse[v] = i;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self { forward: (0..n).collect(), inverse: (0..n).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut forward: Vec<usize> = (0..n).collect();
        forward.shuffle(rng);
        let mut inverse = vec![0; n];
        for (i, &v) in forward.iter().enumerate() {
            inverse[v] = i;
        }
        Self { forward, inverse }
    }

    pub fn from_seed(n: usize, seed: u64) -> Self {
        Self::random(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    #[inline]
    pub fn invert(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> Permutation {
        Self { forward: self.inverse.clone(), inverse: self.forward.clone() }
    }

    /// `F^{-1}[S]` for a membership mask `S`.
    pub fn preimage_mask(&self, mask: &[bool]) -> Vec<bool> {
        (0..self.len()).map(|i| mask[self.forward[i]]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn inverse_round_trips() {
        let p = Permutation::from_seed(50, 9);
        for i in 0..50 {
            assert_eq!(p.invert(p.apply(i)), i);
            assert_eq!(p.inverse().apply(p.apply(i)), i);
        }
    }

    #[test]
    fn seeded_permutations_are_reproducible() {
        assert_eq!(Permutation::from_seed(16, 3), Permutation::from_seed(16, 3));
        assert_ne!(Permutation::from_seed(16, 3), Permutation::from_seed(16, 4));
    }
}
