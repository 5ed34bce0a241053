//! Direct sampler for the shuffle graph.
//!
//! Only the sizes of the runs of equal sorted rows matter for `G`. After
//! `t - 1` columns the rows form runs sharing a prefix; column `t` splits a
//! run of size `g` by the digit counts its rows receive, which are
//! multivariate hypergeometric from the column's remaining digit pool, and
//! the sub-runs appear in digit order. Runs of size one stay put. Cost is
//! `O(k)` per nontrivial run per column instead of sorting an `N x K` matrix.

use rand::Rng;

use super::matrix::{graph_sort, ShuffleGraph};
use super::perm::Permutation;
use super::piles::{CutProcess, PileSizes};
use crate::error::Result;
use crate::stats::hypergeometric::multivariate_hypergeometric;

/// Groups up to this size draw their digits one row at a time.
const SMALL_GROUP: u64 = 24;

/// A run of equal rows, or a stretch of consecutive singleton rows.
#[derive(Clone, Copy)]
enum Run {
    Group(u32),
    Singles(u32),
}

fn push_singles(runs: &mut Vec<Run>, c: u32) {
    match runs.last_mut() {
        Some(Run::Singles(s)) => *s += c,
        _ => runs.push(Run::Singles(c)),
    }
}

/// Digit counts of `g` rows drawn without replacement from `pool`, which is
/// updated in place.
fn draw_group<R: Rng + ?Sized>(pool: &mut [u64], left: &mut u64, g: u64, rng: &mut R) -> Result<Vec<u64>> {
    let counts = if g <= SMALL_GROUP {
        let mut counts = vec![0u64; pool.len()];
        for _ in 0..g {
            let mut r = rng.random_range(0..*left);
            let mut l = 0;
            while r >= pool[l] {
                r -= pool[l];
                l += 1;
            }
            counts[l] += 1;
            pool[l] -= 1;
            *left -= 1;
        }
        return Ok(counts);
    } else {
        multivariate_hypergeometric(pool, g, rng)?
    };
    for (slot, &c) in pool.iter_mut().zip(&counts) {
        *slot -= c;
    }
    *left -= g;
    Ok(counts)
}

/// Run sizes of the sorted rows of a uniform shuffle matrix, left to right.
///
/// Singleton rows never split again, and by exchangeability their digits can
/// be drawn after everyone else's, so they are skipped.
pub fn sample_component_sizes<R: Rng + ?Sized>(piles: &[PileSizes], rng: &mut R) -> Result<Vec<u32>> {
    let n = piles.first().map_or(0, |p| p.n() as usize);
    let mut runs: Vec<Run> = match n {
        0 => vec![],
        1 => vec![Run::Singles(1)],
        _ => vec![Run::Group(n as u32)],
    };
    for p in piles {
        p.check_total(n)?;
        if runs.iter().all(|r| matches!(r, Run::Singles(_))) {
            break;
        }
        let mut pool: Vec<u64> = p.sizes().to_vec();
        let mut left = n as u64;
        let mut next = Vec::with_capacity(runs.len() * 2);
        for &run in &runs {
            match run {
                Run::Singles(c) => push_singles(&mut next, c),
                Run::Group(g) => {
                    for c in draw_group(&mut pool, &mut left, g as u64, rng)? {
                        match c {
                            0 => {}
                            1 => push_singles(&mut next, 1),
                            c => next.push(Run::Group(c as u32)),
                        }
                    }
                }
            }
        }
        runs = next;
    }
    let mut out = Vec::new();
    for r in runs {
        match r {
            Run::Group(g) => out.push(g),
            Run::Singles(c) => out.extend(std::iter::repeat_n(1, c as usize)),
        }
    }
    Ok(out)
}

pub fn sample_shuffle_graph<R: Rng + ?Sized>(piles: &[PileSizes], rng: &mut R) -> Result<ShuffleGraph> {
    Ok(ShuffleGraph::from_component_sizes(&sample_component_sizes(piles, rng)?))
}

/// `X_K^{-1} = pi^G` for the identity deck, with `G` from the run sampler.
pub fn sample_inverse_deck<R: Rng + ?Sized>(process: &CutProcess, n: usize, k: usize, rng: &mut R) -> Result<Permutation> {
    let piles = process.pile_sequence(n, k, rng)?;
    let g = if k == 0 { ShuffleGraph::full_path(n) } else { sample_shuffle_graph(&piles, rng)? };
    graph_sort(&Permutation::uniform(n, rng), &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use crate::shuffle::matrix::{sample_shuffle_matrix, shuffle_graph, sort_lex};
    use std::collections::HashMap;

    fn piles(s: &[&[u64]]) -> Vec<PileSizes> {
        s.iter().map(|p| PileSizes::new(p.to_vec()).unwrap()).collect()
    }

    #[test]
    fn sizes_add_up() {
        let mut rng = StreamKey::new(1).rng();
        let seq = piles(&[&[50, 50], &[30, 30, 40], &[1, 99]]);
        for _ in 0..100 {
            let g = sample_component_sizes(&seq, &mut rng).unwrap();
            assert_eq!(g.iter().sum::<u32>(), 100);
        }
    }

    #[test]
    fn degenerate_columns() {
        let mut rng = StreamKey::new(1).rng();
        assert_eq!(sample_component_sizes(&piles(&[&[5, 0], &[0, 5]]), &mut rng).unwrap(), vec![5]);
        assert_eq!(sample_shuffle_graph(&[], &mut rng).unwrap().n(), 0);
    }

    #[test]
    fn matches_matrix_sorting_in_law() {
        // Law of the edge mask for N = 6 under both samplers.
        let seq = piles(&[&[3, 3], &[2, 4], &[1, 2, 3]]);
        let trials = 100_000;
        let mut a: HashMap<Vec<bool>, u32> = HashMap::new();
        let mut b: HashMap<Vec<bool>, u32> = HashMap::new();
        let mut rng = StreamKey::new(5).rng();
        for _ in 0..trials {
            *a.entry(sample_shuffle_graph(&seq, &mut rng).unwrap().mask().to_vec()).or_default() += 1;
            let m = sample_shuffle_matrix(&seq, &mut rng).unwrap();
            *b.entry(shuffle_graph(&sort_lex(&m)).mask().to_vec()).or_default() += 1;
        }
        let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).cloned().collect();
        for key in keys {
            let (x, y) = (*a.get(&key).unwrap_or(&0) as f64, *b.get(&key).unwrap_or(&0) as f64);
            let p = (x + y) / (2.0 * trials as f64);
            let se = (2.0 * p * (1.0 - p) / trials as f64).sqrt();
            assert!(((x - y) / trials as f64).abs() < 5.0 * se + 1e-4, "{key:?}: {x} vs {y}");
        }
    }
}
