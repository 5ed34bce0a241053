//! Forward riffle shuffles.
//!
//! A riffle cuts the deck top-down into piles and interleaves them: output
//! position `j` receives the next card of pile `d_j`, where the pile
//! sequence `d` is drawn by the drop rule (pile `l` with probability
//! `A_l / (A_0 + .. + A_{k-1})`, `A_l` = cards left in pile `l`), which makes
//! every interleaving equally likely. With `tau(j)` = old position of the card
//! placed at `j`, the new deck is `deck o tau`.
//!
//! Worked example, `N = 3`, piles `(2, 1)`, identity deck `(1,2,3)`: the
//! piles are `{1,2}` and `{3}`; `d = 0,1,0` gives `tau = (1,3,2)` and deck
//! `(1,3,2)`. The three interleavings `(1,2,3)`, `(1,3,2)`, `(3,1,2)` each have
//! probability `1/3`. After `K` riffles of the identity the deck is
//! `tau_1 o tau_2 o .. o tau_K`.

use rand::Rng;

use super::perm::Permutation;
use super::piles::{CutProcess, PileSizes};
use crate::error::{Error, Result};

/// Pile labels of output positions by the sequential drop rule.
pub fn drop_sequence<R: Rng + ?Sized>(piles: &PileSizes, rng: &mut R) -> Vec<u8> {
    let mut left: Vec<u64> = piles.sizes().to_vec();
    let mut total: u64 = left.iter().sum();
    let mut out = Vec::with_capacity(total as usize);
    while total > 0 {
        let mut r = rng.random_range(0..total);
        let mut l = 0;
        while r >= left[l] {
            r -= left[l];
            l += 1;
        }
        left[l] -= 1;
        total -= 1;
        out.push(l as u8);
    }
    out
}

/// `tau(j) = offset(d_j) + #{i < j : d_i = d_j}`.
pub fn interleaving(piles: &PileSizes, digits: &[u8]) -> Result<Permutation> {
    piles.check_total(digits.len())?;
    let mut next: Vec<usize> = piles.offsets();
    let mut used = vec![0u64; piles.k()];
    let mut tau = Vec::with_capacity(digits.len());
    for &d in digits {
        let l = d as usize;
        if l >= piles.k() || used[l] == piles.sizes()[l] {
            return Err(Error::SizeMismatch { expected: piles.sizes().get(l).copied().unwrap_or(0) as usize, got: used.get(l).copied().unwrap_or(0) as usize + 1 });
        }
        used[l] += 1;
        tau.push(next[l] as u32);
        next[l] += 1;
    }
    Ok(Permutation::from_vec_unchecked(tau))
}

/// One riffle of `deck` with the given cut.
pub fn riffle_once<R: Rng + ?Sized>(deck: &Permutation, piles: &PileSizes, rng: &mut R) -> Result<Permutation> {
    piles.check_total(deck.len())?;
    let digits = drop_sequence(piles, rng);
    deck.compose(&interleaving(piles, &digits)?)
}

/// `K` riffles with cuts from `process`, drawn from the same stream.
pub fn shuffle_k<R: Rng + ?Sized>(deck: &Permutation, process: &CutProcess, k: usize, rng: &mut R) -> Result<Permutation> {
    let mut deck = deck.clone();
    for t in 1..=k {
        let piles = process.cut_sizes(deck.len(), t, rng)?;
        deck = riffle_once(&deck, &piles, rng)?;
    }
    Ok(deck)
}
