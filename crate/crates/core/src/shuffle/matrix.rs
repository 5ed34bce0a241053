//! The inverse description of a riffle sequence.
//!
//! Row `j` of a shuffle matrix lists, step by step, the pile that the card
//! ending at position `j` passed through. Column `t` is a uniform arrangement
//! of `n^{(t)}_l` copies of each digit `l`, independently over `t`. Card `c`
//! (its initial position) is the `c`-th row in lexicographic order, so the
//! sorted rows `s_1 <= .. <= s_N` determine the inverse deck up to the order
//! inside runs of equal rows. Those runs are the components of the shuffle
//! graph `G` (edges `(i, i+1)` with `s_i = s_{i+1}`), and the inverse deck is
//! distributed as `pi^G` for uniform `pi`: `pi` with values sorted inside each
//! component.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::perm::Permutation;
use super::piles::{CutProcess, PileSizes};
use crate::error::{Error, Result};

/// `N x K` digit matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShuffleMatrix {
    n: usize,
    piles: Vec<PileSizes>,
    columns: Vec<Vec<u8>>,
}

impl ShuffleMatrix {
    /// Checks that every column's digit counts equal its pile sizes.
    pub fn from_columns(piles: Vec<PileSizes>, columns: Vec<Vec<u8>>) -> Result<Self> {
        let n = piles.first().map_or(0, |p| p.n() as usize);
        if piles.len() != columns.len() {
            return Err(Error::SizeMismatch { expected: piles.len(), got: columns.len() });
        }
        for (p, col) in piles.iter().zip(&columns) {
            p.check_total(n)?;
            if col.len() != n {
                return Err(Error::SizeMismatch { expected: n, got: col.len() });
            }
            let mut counts = vec![0u64; p.k()];
            for &d in col {
                match counts.get_mut(d as usize) {
                    Some(c) => *c += 1,
                    None => return Err(Error::SizeMismatch { expected: p.k(), got: d as usize + 1 }),
                }
            }
            if counts != p.sizes() {
                return Err(Error::SizeMismatch { expected: n, got: counts.iter().sum::<u64>() as usize });
            }
        }
        Ok(ShuffleMatrix { n, piles, columns })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.columns.len()
    }

    pub fn piles(&self) -> &[PileSizes] {
        &self.piles
    }

    pub fn column(&self, t: usize) -> &[u8] {
        &self.columns[t]
    }

    pub fn row(&self, i: usize) -> Vec<u8> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn column_counts(&self, t: usize) -> Vec<u64> {
        let mut counts = vec![0u64; self.piles[t].k()];
        for &d in &self.columns[t] {
            counts[d as usize] += 1;
        }
        counts
    }
}

fn uniform_column<R: Rng + ?Sized>(piles: &PileSizes, rng: &mut R) -> Vec<u8> {
    let mut col: Vec<u8> =
        piles.sizes().iter().enumerate().flat_map(|(l, &s)| std::iter::repeat_n(l as u8, s as usize)).collect();
    col.shuffle(rng);
    col
}

/// Uniform shuffle matrix with the given column counts. The constraint is
/// per column, so the uniform law is a product of uniform columns.
pub fn sample_shuffle_matrix<R: Rng + ?Sized>(piles: &[PileSizes], rng: &mut R) -> Result<ShuffleMatrix> {
    let columns = piles.iter().map(|p| uniform_column(p, rng)).collect();
    ShuffleMatrix::from_columns(piles.to_vec(), columns)
}

/// Rows in lexicographic order (column 1 most significant), with the
/// original row index of each sorted slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortedStrings {
    pub rows: Vec<Vec<u8>>,
    pub order: Vec<u32>,
}

pub fn sort_lex(matrix: &ShuffleMatrix) -> SortedStrings {
    let mut order: Vec<u32> = (0..matrix.n() as u32).collect();
    order.sort_by(|&a, &b| {
        for c in &matrix.columns {
            match c[a as usize].cmp(&c[b as usize]) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    let rows = order.iter().map(|&i| matrix.row(i as usize)).collect();
    SortedStrings { rows, order }
}

impl SortedStrings {
    /// `X_K^{-1}` with ties broken by row index, which is how the forward
    /// riffles resolve them.
    pub fn inverse_deck(&self) -> Permutation {
        Permutation::from_vec_unchecked(self.order.clone())
    }
}

/// Subgraph of the path `1 - 2 - .. - N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShuffleGraph {
    n: usize,
    /// `edges[i]` is the edge `(i+1, i+2)` in 1-based labels.
    edges: Vec<bool>,
}

impl ShuffleGraph {
    pub fn empty(n: usize) -> Self {
        ShuffleGraph { n, edges: vec![false; n.saturating_sub(1)] }
    }

    pub fn full_path(n: usize) -> Self {
        ShuffleGraph { n, edges: vec![true; n.saturating_sub(1)] }
    }

    /// From 1-based edges `(i, i+1)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if a < 1 || b != a + 1 || b > n {
                return Err(Error::Parse(format!("({a}, {b}) is not a path edge for N = {n}")));
            }
            g.edges[a - 1] = true;
        }
        Ok(g)
    }

    /// Path components of the given sizes, left to right.
    pub fn from_component_sizes(sizes: &[u32]) -> Self {
        let n: usize = sizes.iter().map(|&s| s as usize).sum();
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        for (c, &s) in sizes.iter().filter(|&&s| s > 0).enumerate() {
            if c > 0 {
                edges.push(false);
            }
            edges.extend(std::iter::repeat_n(true, s as usize - 1));
        }
        debug_assert_eq!(edges.len(), n.saturating_sub(1));
        ShuffleGraph { n, edges }
    }

    pub fn from_mask(n: usize, edges: Vec<bool>) -> Result<Self> {
        if edges.len() != n.saturating_sub(1) {
            return Err(Error::SizeMismatch { expected: n.saturating_sub(1), got: edges.len() });
        }
        Ok(ShuffleGraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> &[bool] {
        &self.edges
    }

    /// Whether `(i, i+1)` (1-based) is an edge.
    pub fn has_edge(&self, i: usize) -> bool {
        i >= 1 && i < self.n && self.edges[i - 1]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// 1-based edges `(i, i+1)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().enumerate().filter(|(_, &e)| e).map(|(i, _)| (i + 1, i + 2))
    }

    /// `(start, len)` of each component, 0-based starts.
    pub fn components(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 0..self.n {
            if i + 1 == self.n || !self.edges[i] {
                out.push((start, i + 1 - start));
                start = i + 1;
            }
        }
        out
    }
}

/// Edges between equal adjacent sorted rows.
pub fn shuffle_graph(sorted: &SortedStrings) -> ShuffleGraph {
    let edges = sorted.rows.windows(2).map(|w| w[0] == w[1]).collect();
    ShuffleGraph { n: sorted.rows.len(), edges }
}

/// `sigma^G`: values of `sigma` sorted inside each component of `g`.
pub fn graph_sort(sigma: &Permutation, g: &ShuffleGraph) -> Result<Permutation> {
    if sigma.len() != g.n() {
        return Err(Error::SizeMismatch { expected: g.n(), got: sigma.len() });
    }
    let mut images = sigma.images().to_vec();
    for (start, len) in g.components() {
        if len > 1 {
            images[start..start + len].sort_unstable();
        }
    }
    Ok(Permutation::from_vec_unchecked(images))
}

/// Draws `X_K` for the identity deck through the inverse description:
/// piles, matrix, sorted rows, graph `G`, uniform `pi`, and `(pi^G)^{-1}`.
pub fn sample_inverse_shuffled_perm<R: Rng + ?Sized>(
    process: &CutProcess,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<Permutation> {
    let piles = process.pile_sequence(n, k, rng)?;
    let matrix = sample_shuffle_matrix(&piles, rng)?;
    let g = if k == 0 { ShuffleGraph::full_path(n) } else { shuffle_graph(&sort_lex(&matrix)) };
    let pi = Permutation::uniform(n, rng);
    Ok(graph_sort(&pi, &g)?.inverse())
}
