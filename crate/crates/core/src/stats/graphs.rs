//! Shuffle-graph diagnostics: window sparsity and shared edges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::shuffle::{sample_shuffle_graph, CutProcess, ShuffleGraph};

/// Every window of `l` consecutive vertices carries at most `l / 3` edges.
/// A graph with fewer than `l` vertices is checked as a single window.
pub fn is_l_sparse(g: &ShuffleGraph, l: usize) -> bool {
    let edges = g.mask();
    // A window of l vertices spans l - 1 edge slots.
    let w = l.saturating_sub(1).min(edges.len());
    let ok = |c: usize| 3 * c <= l;
    let mut count = edges[..w].iter().filter(|&&e| e).count();
    if !ok(count) {
        return false;
    }
    for i in w..edges.len() {
        count += edges[i] as usize;
        count -= edges[i - w] as usize;
        if !ok(count) {
            return false;
        }
    }
    true
}

/// `|E(G) n E(G')|`.
pub fn shared_edges(g: &ShuffleGraph, h: &ShuffleGraph) -> Result<usize> {
    if g.n() != h.n() {
        return Err(Error::SizeMismatch { expected: g.n(), got: h.n() });
    }
    Ok(g.mask().iter().zip(h.mask()).filter(|(a, b)| **a && **b).count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstMomentRow {
    pub n: usize,
    pub k: usize,
    pub pairs: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Mean of `|E(G, G')|` over `pairs` draws. Each pair shares one pile
/// sequence and the two graphs are independent given it. Pair `i` at the
/// `j`-th size uses `key.child(j).child(i)`.
pub fn first_moment_scan(
    process: &CutProcess,
    ns: &[usize],
    k_rule: impl Fn(usize) -> usize + Sync,
    pairs: usize,
    key: StreamKey,
) -> Result<Vec<FirstMomentRow>> {
    if pairs < 2 {
        return Err(Error::InvalidConfig("need at least two pairs".into()));
    }
    ns.iter()
        .enumerate()
        .map(|(j, &n)| {
            let k = k_rule(n);
            let counts: Vec<f64> = (0..pairs as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = key.child(j as u64).child(i).rng();
                    let piles = process.pile_sequence(n, k, &mut rng)?;
                    let (g, h) = if k == 0 {
                        (ShuffleGraph::full_path(n), ShuffleGraph::full_path(n))
                    } else {
                        (sample_shuffle_graph(&piles, &mut rng)?, sample_shuffle_graph(&piles, &mut rng)?)
                    };
                    Ok(shared_edges(&g, &h)? as f64)
                })
                .collect::<Result<_>>()?;
            let m = counts.len() as f64;
            let mean = counts.iter().sum::<f64>() / m;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0);
            Ok(FirstMomentRow { n, k, pairs, mean, std_error: (var / m).sqrt() })
        })
        .collect()
}
