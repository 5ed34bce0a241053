//! Exact laws of riffle-shuffled decks for `N <= 8`.
//!
//! A law is a dense vector indexed by the Lehmer rank of the deck. One step
//! with piles `n` puts mass `1 / multinomial(N; n)` on every interleaving;
//! `K` steps multiply these kernels on the right, matching
//! `X_K = tau_1 o .. o tau_K`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::shuffle::matrix::{graph_sort, shuffle_graph, sort_lex, ShuffleMatrix};
use crate::shuffle::perm::{factorial, Permutation};
use crate::shuffle::piles::{multinomial_coefficient, CutProcess, PileSizes};
use crate::shuffle::riffle::interleaving;

pub const MAX_EXACT_N: usize = 8;

/// Probability of every deck of `n` cards, by Lehmer rank.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactDistribution<W> {
    n: usize,
    probs: Vec<W>,
}

/// Rational law, used up to `N = 6`.
pub type RationalDistribution = ExactDistribution<BigRational>;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge(n));
    }
    Ok(())
}

impl<W: Field> ExactDistribution<W> {
    pub fn point_mass(sigma: &Permutation) -> Result<Self> {
        let n = sigma.len();
        check_size(n)?;
        let mut probs = vec![W::zero(); factorial(n) as usize];
        probs[sigma.lehmer_rank() as usize] = W::one();
        Ok(ExactDistribution { n, probs })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::point_mass(&Permutation::identity(n))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_size(n)?;
        let m = factorial(n) as usize;
        Ok(ExactDistribution { n, probs: vec![W::from_ratio(1, m as i64); m] })
    }

    /// Builds a law from `(deck, mass)` pairs, adding repeated decks.
    pub fn from_masses<I: IntoIterator<Item = (Permutation, W)>>(n: usize, masses: I) -> Result<Self> {
        check_size(n)?;
        let mut probs = vec![W::zero(); factorial(n) as usize];
        for (p, w) in masses {
            if p.len() != n {
                return Err(Error::SizeMismatch { expected: n, got: p.len() });
            }
            let r = p.lehmer_rank() as usize;
            probs[r] = probs[r].clone() + w;
        }
        Ok(ExactDistribution { n, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, sigma: &Permutation) -> W {
        if sigma.len() != self.n {
            return W::zero();
        }
        self.probs[sigma.lehmer_rank() as usize].clone()
    }

    pub fn probs(&self) -> &[W] {
        &self.probs
    }

    pub fn total(&self) -> W {
        self.probs.iter().cloned().fold(W::zero(), |a, b| a + b)
    }

    /// Decks with positive mass, in Lehmer order.
    pub fn support(&self) -> Vec<(Permutation, W)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > W::zero())
            .map(|(r, w)| (Permutation::from_lehmer(self.n, r as u64), w.clone()))
            .collect()
    }

    /// Law of `deck o tau` with `deck ~ self` and `tau ~ kernel` independent.
    pub fn then(&self, kernel: &[(Permutation, W)]) -> Result<Self> {
        let all = all_perms(self.n);
        let mut out = vec![W::zero(); self.probs.len()];
        for (r, w) in self.probs.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let sigma = &all[r];
            for (tau, kw) in kernel {
                let s = sigma.compose(tau)?.lehmer_rank() as usize;
                out[s] = out[s].clone() + w.clone() * kw.clone();
            }
        }
        Ok(ExactDistribution { n: self.n, probs: out })
    }

    pub fn to_f64(&self) -> ExactDistribution<f64> {
        ExactDistribution { n: self.n, probs: self.probs.iter().map(|w| w.to_f64()).collect() }
    }

    pub fn map<V>(&self, f: impl Fn(&W) -> V) -> ExactDistribution<V> {
        ExactDistribution { n: self.n, probs: self.probs.iter().map(f).collect() }
    }
}

fn all_perms(n: usize) -> Vec<Permutation> {
    (0..factorial(n)).map(|r| Permutation::from_lehmer(n, r)).collect()
}

/// Digit strings with exactly `counts[l]` copies of `l`, in lexicographic order.
pub fn arrangements(counts: &[u64]) -> Vec<Vec<u8>> {
    fn rec(left: &mut [u64], cur: &mut Vec<u8>, len: usize, out: &mut Vec<Vec<u8>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for l in 0..left.len() {
            if left[l] > 0 {
                left[l] -= 1;
                cur.push(l as u8);
                rec(left, cur, len, out);
                cur.pop();
                left[l] += 1;
            }
        }
    }
    let mut out = Vec::new();
    let len = counts.iter().sum::<u64>() as usize;
    rec(&mut counts.to_vec(), &mut Vec::with_capacity(len), len, &mut out);
    out
}

/// One-step kernel: each interleaving of `piles` with mass `1 / multinomial`.
pub fn riffle_kernel<W: Field>(piles: &PileSizes) -> Result<Vec<(Permutation, W)>> {
    let w = W::one() / multinomial_coefficient::<W>(piles.sizes());
    arrangements(piles.sizes())
        .iter()
        .map(|d| Ok((interleaving(piles, d)?, w.clone())))
        .collect()
}

/// Kernel of step `t` of a process: the one-step kernels averaged over the
/// exact law of the cut.
pub fn process_kernel<W: Field>(process: &CutProcess, n: usize, t: usize) -> Result<Vec<(Permutation, W)>> {
    let mut acc: BTreeMap<u64, W> = BTreeMap::new();
    for (piles, pw) in process.exact_law::<W>(n, t)? {
        for (tau, w) in riffle_kernel::<W>(&piles)? {
            let e = acc.entry(tau.lehmer_rank()).or_insert_with(W::zero);
            *e = e.clone() + pw.clone() * w;
        }
    }
    Ok(acc.into_iter().map(|(r, w)| (Permutation::from_lehmer(n, r), w)).collect())
}

/// Law of the identity deck after riffles with the given pile sequence.
pub fn exact_shuffle_distribution<W: Field>(n: usize, piles: &[PileSizes]) -> Result<ExactDistribution<W>> {
    check_size(n)?;
    let mut dist = ExactDistribution::identity(n)?;
    for p in piles {
        p.check_total(n)?;
        dist = dist.then(&riffle_kernel::<W>(p)?)?;
    }
    Ok(dist)
}

/// Law of the identity deck after `k` steps of `process`. Fails for
/// measure-driven cuts, whose step law is not finite.
pub fn exact_process_distribution<W: Field>(process: &CutProcess, n: usize, k: usize) -> Result<ExactDistribution<W>> {
    check_size(n)?;
    let mut dist = ExactDistribution::identity(n)?;
    for t in 1..=k {
        dist = dist.then(&process_kernel::<W>(process, n, t)?)?;
    }
    Ok(dist)
}

/// Laws for `K = 0..=k_max`, sharing the convolutions.
pub fn exact_process_laws<W: Field>(process: &CutProcess, n: usize, k_max: usize) -> Result<Vec<ExactDistribution<W>>> {
    check_size(n)?;
    let mut out = vec![ExactDistribution::identity(n)?];
    for t in 1..=k_max {
        let next = out[t - 1].then(&process_kernel::<W>(process, n, t)?)?;
        out.push(next);
    }
    Ok(out)
}

/// `(1/2) sum |P(sigma) - 1/N!|`.
pub fn exact_tv<W: Field>(dist: &ExactDistribution<W>) -> W {
    let u = W::from_ratio(1, dist.probs.len() as i64);
    let two = W::from_ratio(2, 1);
    dist.probs.iter().map(|p| (p.clone() - u.clone()).abs()).fold(W::zero(), |a, b| a + b) / two
}

/// Law of `X_K` obtained through the inverse description: every shuffle
/// matrix with the given column counts is equally likely, `pi` is uniform,
/// and the deck is `(pi^G)^{-1}`. Enumerated literally.
pub fn exact_inverse_construction_law<W: Field>(n: usize, piles: &[PileSizes]) -> Result<ExactDistribution<W>> {
    check_size(n)?;
    for p in piles {
        p.check_total(n)?;
    }
    // Count matrices per graph.
    let columns: Vec<Vec<Vec<u8>>> = piles.iter().map(|p| arrangements(p.sizes())).collect();
    let mut graphs: BTreeMap<Vec<bool>, u64> = BTreeMap::new();
    let mut idx = vec![0usize; piles.len()];
    // With no columns every row is the empty string, so G is the full path.
    if piles.is_empty() {
        graphs.insert(vec![true; n.saturating_sub(1)], 1);
    }
    while !piles.is_empty() {
        let cols = idx.iter().zip(&columns).map(|(&i, c)| c[i].clone()).collect();
        let m = ShuffleMatrix::from_columns(piles.to_vec(), cols)?;
        let g = if n == 0 { vec![] } else { shuffle_graph(&sort_lex(&m)).mask().to_vec() };
        *graphs.entry(g).or_insert(0) += 1;
        // Odometer over column choices.
        let mut j = 0;
        while j < idx.len() {
            idx[j] += 1;
            if idx[j] < columns[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            break;
        }
    }
    let n_matrices: u64 = graphs.values().sum();
    let perms = all_perms(n);
    let per_sigma = W::from_ratio(1, perms.len() as i64);
    let mut masses = Vec::new();
    for (mask, count) in graphs {
        let g = crate::shuffle::ShuffleGraph::from_mask(n, mask)?;
        let wg = W::from_ratio(count as i64, n_matrices as i64) * per_sigma.clone();
        for sigma in &perms {
            masses.push((graph_sort(sigma, &g)?.inverse(), wg.clone()));
        }
    }
    ExactDistribution::from_masses(n, masses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::from_ratio(a, b)
    }

    fn piles(s: &[u64]) -> PileSizes {
        PileSizes::new(s.to_vec()).unwrap()
    }

    #[test]
    fn three_cards_two_one() {
        let d = exact_shuffle_distribution::<BigRational>(3, &[piles(&[2, 1])]).unwrap();
        let support = d.support();
        let decks: Vec<String> = support.iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(decks, vec!["(1,2,3)", "(1,3,2)", "(3,1,2)"]);
        assert!(support.iter().all(|(_, w)| *w == q(1, 3)));
        assert_eq!(exact_tv(&d), q(1, 2));
    }

    #[test]
    fn trivial_laws() {
        let d = exact_shuffle_distribution::<BigRational>(4, &[]).unwrap();
        assert_eq!(d.prob(&Permutation::identity(4)), BigRational::one());
        let d = exact_shuffle_distribution::<BigRational>(4, &vec![piles(&[4, 0]); 3]).unwrap();
        assert_eq!(d.prob(&Permutation::identity(4)), BigRational::one());
        let p = ExactDistribution::<BigRational>::identity(3).unwrap();
        assert_eq!(exact_tv(&p), q(5, 6));
        assert!(exact_tv(&ExactDistribution::<BigRational>::uniform(4).unwrap()).is_zero());
    }

    #[test]
    fn too_large() {
        assert_eq!(exact_shuffle_distribution::<f64>(9, &[]), Err(Error::TooLarge(9)));
    }

    #[test]
    fn sums_to_one() {
        let d = exact_process_distribution::<BigRational>(&CutProcess::gsr(), 5, 3).unwrap();
        assert_eq!(d.total(), BigRational::one());
        let d = exact_process_distribution::<f64>(&CutProcess::UniformCut, 7, 2).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn float_law_tracks_rational_law() {
        for k in [1, 3, 6] {
            let r = exact_process_distribution::<BigRational>(&CutProcess::gsr(), 6, k).unwrap();
            let f = exact_process_distribution::<f64>(&CutProcess::gsr(), 6, k).unwrap();
            assert!((exact_tv(&r).to_f64() - exact_tv(&f)).abs() < 1e-12);
        }
    }

    #[test]
    fn gsr_one_step_matches_eulerian_count() {
        // One GSR step: identity has mass (N+1)/2^N, every other deck with
        // two rising sequences 1/2^N.
        let d = exact_process_distribution::<BigRational>(&CutProcess::gsr(), 4, 1).unwrap();
        assert_eq!(d.prob(&Permutation::identity(4)), q(5, 16));
        assert_eq!(d.support().len(), 12);
    }

    #[test]
    fn inverse_construction_agrees_small() {
        let seq = vec![piles(&[2, 1, 1]), piles(&[1, 3])];
        let a = exact_shuffle_distribution::<BigRational>(4, &seq).unwrap();
        let b = exact_inverse_construction_law::<BigRational>(4, &seq).unwrap();
        assert_eq!(a, b);
        let id = exact_inverse_construction_law::<BigRational>(4, &[]).unwrap();
        assert_eq!(id, ExactDistribution::identity(4).unwrap());
    }

    #[test]
    fn arrangements_count() {
        assert_eq!(arrangements(&[2, 1, 1]).len(), 12);
        assert_eq!(arrangements(&[0, 0]), vec![Vec::<u8>::new()]);
    }
}
