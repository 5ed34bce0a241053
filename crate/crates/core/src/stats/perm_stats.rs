//! Descents, rising sequences and increasing runs.

use crate::shuffle::Permutation;

/// `#{i : sigma(i) > sigma(i+1)}`.
pub fn descents(sigma: &Permutation) -> usize {
    sigma.images().windows(2).filter(|w| w[0] > w[1]).count()
}

/// `#{i : sigma(i) < sigma(i+1)}`.
pub fn ascents(sigma: &Permutation) -> usize {
    sigma.images().windows(2).filter(|w| w[0] < w[1]).count()
}

/// Number of maximal runs of consecutive values that appear left to right:
/// `1 + #{v : position(v+1) < position(v)}`, i.e. one plus the descents of
/// the inverse.
pub fn rising_sequences(sigma: &Permutation) -> usize {
    let n = sigma.len();
    if n == 0 {
        return 0;
    }
    let mut pos = vec![0u32; n];
    for (i, &v) in sigma.images().iter().enumerate() {
        pos[v as usize] = i as u32;
    }
    1 + pos.windows(2).filter(|w| w[1] < w[0]).count()
}

/// Length of the longest block `sigma(i) < sigma(i+1) < ..` of adjacent
/// positions.
pub fn longest_increasing_run(sigma: &Permutation) -> usize {
    let im = sigma.images();
    if im.is_empty() {
        return 0;
    }
    let (mut best, mut cur) = (1, 1);
    for w in im.windows(2) {
        cur = if w[0] < w[1] { cur + 1 } else { 1 };
        best = best.max(cur);
    }
    best
}
