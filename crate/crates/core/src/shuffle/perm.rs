//! Permutations of `{0, .., N-1}` in one-line notation.
//!
//! A deck is a permutation `deck[pos] = card`; cards are labelled by their
//! initial positions. Display and the `*_one_based` helpers use the 1-based
//! labels `1..=N`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n as u32).collect() }
    }

    /// From 0-based images; checks bijectivity.
    pub fn new(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(Error::Parse(format!("not a permutation of 0..{n}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::Parse("one-based images must be >= 1".into()));
        }
        Self::new(images.iter().map(|&v| (v - 1) as u32).collect())
    }

    /// Uniform permutation (Fisher-Yates).
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            images.swap(i, j);
        }
        Permutation { images }
    }

    pub(crate) fn from_vec_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Self::new(images.clone()).is_ok());
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn get(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `(self o other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch { expected: self.len(), got: other.len() });
        }
        Ok(Permutation { images: other.images.iter().map(|&j| self.images[j as usize]).collect() })
    }

    /// Rank in lexicographic order of one-line notations (Lehmer code), for
    /// `N <= 20`.
    pub fn lehmer_rank(&self) -> u64 {
        lehmer_rank(&self.images)
    }

    pub fn from_lehmer(n: usize, rank: u64) -> Self {
        Permutation { images: lehmer_unrank(n, rank) }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub(crate) fn lehmer_rank(images: &[u32]) -> u64 {
    let n = images.len();
    let mut rank = 0u64;
    for i in 0..n {
        let smaller_later = images[i + 1..].iter().filter(|&&v| v < images[i]).count() as u64;
        rank = rank * (n - i) as u64 + smaller_later;
    }
    rank
}

pub(crate) fn lehmer_unrank(n: usize, mut rank: u64) -> Vec<u32> {
    let mut digits = vec![0usize; n];
    for i in (0..n).rev() {
        let base = (n - i) as u64;
        digits[i] = (rank % base) as usize;
        rank /= base;
    }
    let mut pool: Vec<u32> = (0..n as u32).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn lehmer_round_trip() {
        for n in 0..=6 {
            for r in 0..factorial(n) {
                let p = Permutation::from_lehmer(n, r);
                assert_eq!(p.lehmer_rank(), r);
            }
        }
        assert!(Permutation::from_lehmer(4, 0).is_identity());
        assert_eq!(Permutation::from_lehmer(3, 5).one_based(), vec![3, 2, 1]);
    }

    #[test]
    fn lehmer_order_is_lexicographic() {
        let all: Vec<_> = (0..24).map(|r| Permutation::from_lehmer(4, r)).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn compose_and_inverse() {
        let s = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        let t = Permutation::from_one_based(&[1, 3, 2]).unwrap();
        // s(t(1)) = s(1) = 2, s(t(2)) = s(3) = 1, s(t(3)) = s(2) = 3.
        assert_eq!(s.compose(&t).unwrap().one_based(), vec![2, 1, 3]);
        assert!(s.compose(&s.inverse()).unwrap().is_identity());
        assert_eq!(s.to_string(), "(2,3,1)");
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
    }

    #[test]
    fn uniform_is_roughly_uniform() {
        let mut rng = StreamKey::new(3).rng();
        let mut counts = [0u32; 6];
        for _ in 0..60_000 {
            counts[Permutation::uniform(3, &mut rng).lehmer_rank() as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 400.0, "{counts:?}");
        }
    }
}
