//! Cold spots: a deterministic set `H` of sorted positions where an
//! under-shuffled deck keeps too many ascents.
//!
//! The first `M = alpha_tot log N` steps are grouped by the cell of their
//! normalised cut. In each cell, digit `l` (restricted to piles with
//! `p_l > chi`) receives an integer quota close to `p_l^theta / sum p^theta`
//! times the number of steps in the cell. A prefix of length `M` is
//! collision-likely when it meets every quota, and `H` collects the integer
//! points of `N J_x` over those prefixes. Steps whose cell carries no mass use
//! their own cut as the cell's atom.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TestReport;
use crate::constants::info_i;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::shuffle::piles::largest_remainder;
use crate::shuffle::{graph_sort, prefix_interval, sample_shuffle_graph, CutProcess, PileSizes, Permutation};
use crate::simplex::{CellKey, Discretization, Point};

/// Guard against `floor` landing one below an exact integer.
const FLOOR_GUARD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColdSpotConfig {
    pub delta: f64,
    pub chi: f64,
    pub rho: f64,
    /// Prefix enumeration cap; beyond it a seeded subsample is used.
    pub max_prefixes: usize,
    pub seed: u64,
}

impl Default for ColdSpotConfig {
    fn default() -> Self {
        ColdSpotConfig { delta: 0.1, chi: 0.05, rho: 0.0, max_prefixes: 1_000_000, seed: 0 }
    }
}

/// Digit quotas of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellQuota {
    pub cell: CellKey,
    pub atom: Point,
    /// Steps (1-based) of the prefix falling in this cell.
    pub positions: Vec<usize>,
    /// Digits `l` with `p_l > chi`.
    pub digits: Vec<u8>,
    /// `p_l^theta`, normalised over `digits`.
    pub targets: Vec<f64>,
    pub quotas: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColdSpotSet {
    pub n: usize,
    /// Disjoint, sorted, 1-based inclusive intervals.
    pub intervals: Vec<(usize, usize)>,
    pub delta: f64,
    pub chi: f64,
    pub rho: f64,
    pub theta: f64,
    pub alpha_tot_log_n: usize,
    pub cells: Vec<CellQuota>,
    /// Number of collision-likely prefixes (saturating).
    pub prefix_count: u128,
    /// Prefixes whose intervals make up `H`.
    pub prefixes_used: usize,
    /// True when `H` was built from a subsample of the prefixes.
    pub capped: bool,
}

impl ColdSpotSet {
    /// Builds a set directly from intervals, for tests and external `H`.
    pub fn from_intervals(n: usize, intervals: Vec<(usize, usize)>, delta: f64) -> Result<Self> {
        if intervals.iter().any(|&(a, b)| a < 1 || b > n || a > b) {
            return Err(Error::InvalidConfig("intervals must lie in [1, N]".into()));
        }
        Ok(ColdSpotSet {
            n,
            intervals: merge(intervals),
            delta,
            chi: f64::NAN,
            rho: f64::NAN,
            theta: f64::NAN,
            alpha_tot_log_n: 0,
            cells: vec![],
            prefix_count: 0,
            prefixes_used: 0,
            capped: false,
        })
    }

    pub fn size(&self) -> usize {
        self.intervals.iter().map(|(a, b)| b - a + 1).sum()
    }

    /// Path edges with exactly one endpoint in `H`.
    pub fn boundary(&self) -> usize {
        self.intervals.iter().map(|&(a, b)| (a > 1) as usize + (b < self.n) as usize).sum()
    }

    pub fn contains(&self, i: usize) -> bool {
        let j = self.intervals.partition_point(|&(_, b)| b < i);
        self.intervals.get(j).is_some_and(|&(a, _)| a <= i)
    }

    /// `|H| >= N^{1/2}` and `|dH| <= 2 |H|^{1/2}`.
    pub fn satisfies_bounds(&self) -> bool {
        let h = self.size() as f64;
        h >= (self.n as f64).sqrt() && self.boundary() as f64 <= 2.0 * h.sqrt()
    }

    /// `|H|/2 + |H|^{1/2 + delta/2}`.
    pub fn threshold(&self) -> f64 {
        let h = self.size() as f64;
        h / 2.0 + h.powf(0.5 + self.delta / 2.0)
    }

    /// Whether `x` meets every digit quota.
    pub fn is_collision_likely_prefix(&self, x: &[u8]) -> bool {
        x.len() == self.alpha_tot_log_n
            && self.cells.iter().all(|c| {
                let mut counts = vec![0u64; c.digits.len()];
                for &t in &c.positions {
                    match c.digits.iter().position(|&d| d == x[t - 1]) {
                        Some(j) => counts[j] += 1,
                        None => return false,
                    }
                }
                counts == c.quotas
            })
    }
}

fn merge(mut v: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    v.sort_unstable();
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Integer points `i` (1-based) with `i - 1` in `[N lo, N hi)`.
fn integer_span(n: usize, (lo, hi): (f64, f64)) -> Option<(usize, usize)> {
    let nf = n as f64;
    let a = (nf * lo).ceil().max(0.0) as usize;
    let b = ((nf * hi).ceil() as usize).min(n);
    (a < b).then_some((a + 1, b))
}

fn saturating_multinomial(counts: &[u64]) -> u128 {
    let mut acc: u128 = 1;
    let mut total: u128 = 0;
    for &c in counts {
        for j in 1..=c as u128 {
            total += 1;
            // acc * total / j stays integral at every step.
            acc = match acc.checked_mul(total) {
                Some(v) => v / j,
                None => return u128::MAX,
            };
        }
    }
    acc
}

/// Constructs `H` for a pile sequence, a finite mixture discretizing `mu`
/// (cells and weights) and `theta`.
pub fn build_cold_spots(piles: &[PileSizes], disc: &Discretization, theta: f64, cfg: &ColdSpotConfig) -> Result<ColdSpotSet> {
    let n = piles.first().map(|p| p.n() as usize).ok_or(Error::TooFewSteps { needed: 1, got: 0 })?;
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidConfig(format!("delta = {} must lie in (0, 1)", cfg.delta)));
    }
    if !(cfg.rho >= 0.0) {
        return Err(Error::InvalidConfig(format!("rho = {} must be nonnegative", cfg.rho)));
    }
    let log_n = (n as f64).ln();
    let mut denom = 0.0;
    for (w, p) in disc.weights.iter().zip(&disc.atoms) {
        if *w > 0.0 && !p.is_vertex() {
            denom += 2.0 * w * info_i(p, theta)?;
        }
    }
    if !(denom > 0.0) {
        return Err(Error::DegenerateMixture("every atom with mass is a vertex".into()));
    }
    let m = ((1.0 - cfg.delta) / denom * log_n + FLOOR_GUARD).floor() as usize;
    let pad = (2.0 * cfg.rho * log_n + FLOOR_GUARD).floor() as usize;
    if m == 0 || piles.len() <= m + pad {
        return Err(Error::TooFewSteps { needed: m + pad, got: piles.len() });
    }

    // Group prefix steps by cell.
    let mut cells: Vec<CellQuota> = Vec::new();
    for (t, p) in piles[..m].iter().enumerate() {
        p.check_total(n)?;
        let q = p.fractions()?;
        let key = disc.grid.cell_of(&q);
        let idx = match cells.iter().position(|c| c.cell == key) {
            Some(i) => i,
            None => {
                let atom = disc.index_of(&q).map_or(q, |i| disc.atoms[i].clone());
                cells.push(CellQuota { cell: key, atom, positions: vec![], digits: vec![], targets: vec![], quotas: vec![] });
                cells.len() - 1
            }
        };
        cells[idx].positions.push(t + 1);
    }
    for (i, c) in cells.iter_mut().enumerate() {
        let coords = c.atom.coords();
        c.digits = (0..coords.len()).filter(|&l| coords[l] > cfg.chi).map(|l| l as u8).collect();
        if c.digits.is_empty() {
            return Err(Error::QuotaInfeasible(i));
        }
        let w: Vec<f64> = c.digits.iter().map(|&l| coords[l as usize].powf(theta)).collect();
        let total: f64 = w.iter().sum();
        c.targets = w.iter().map(|x| x / total).collect();
        let count = c.positions.len() as u64;
        c.quotas = largest_remainder(count, &c.targets);
        let slack_ok = c.quotas.iter().zip(&c.targets).all(|(&a, &p)| (a as f64 - p * count as f64).abs() <= 1.0);
        if !slack_ok || c.quotas.iter().sum::<u64>() != count {
            return Err(Error::QuotaInfeasible(i));
        }
    }

    let prefix_count = cells.iter().fold(1u128, |acc, c| acc.saturating_mul(saturating_multinomial(&c.quotas)));
    let capped = prefix_count > cfg.max_prefixes as u128;
    let mut spans = Vec::new();
    let mut used = 0usize;
    let mut push = |x: &[u8]| {
        used += 1;
        if let Some(s) = integer_span(n, prefix_interval(piles, x)) {
            spans.push(s);
        }
    };
    if capped {
        let mut rng = StreamKey::new(cfg.seed).named("coldspot-prefixes").rng();
        let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
        let mut pools: Vec<Vec<u8>> = cells
            .iter()
            .map(|c| c.digits.iter().zip(&c.quotas).flat_map(|(&d, &q)| std::iter::repeat_n(d, q as usize)).collect())
            .collect();
        let mut x = vec![0u8; m];
        while seen.len() < cfg.max_prefixes {
            for (c, pool) in cells.iter().zip(pools.iter_mut()) {
                pool.shuffle(&mut rng);
                for (&t, &d) in c.positions.iter().zip(pool.iter()) {
                    x[t - 1] = d;
                }
            }
            if seen.insert(x.clone()) {
                push(&x);
            }
        }
    } else {
        // Depth-first in lexicographic order.
        let cell_of_pos: Vec<usize> = {
            let mut v = vec![0; m];
            for (i, c) in cells.iter().enumerate() {
                for &t in &c.positions {
                    v[t - 1] = i;
                }
            }
            v
        };
        let mut left: Vec<Vec<u64>> = cells.iter().map(|c| c.quotas.clone()).collect();
        let mut x = Vec::with_capacity(m);
        fn rec(
            cells: &[CellQuota],
            cell_of_pos: &[usize],
            left: &mut [Vec<u64>],
            x: &mut Vec<u8>,
            push: &mut dyn FnMut(&[u8]),
        ) {
            let t = x.len();
            if t == cell_of_pos.len() {
                push(x);
                return;
            }
            let i = cell_of_pos[t];
            let mut order: Vec<usize> = (0..cells[i].digits.len()).collect();
            order.sort_by_key(|&j| cells[i].digits[j]);
            for j in order {
                if left[i][j] > 0 {
                    left[i][j] -= 1;
                    x.push(cells[i].digits[j]);
                    rec(cells, cell_of_pos, left, x, push);
                    x.pop();
                    left[i][j] += 1;
                }
            }
        }
        rec(&cells, &cell_of_pos, &mut left, &mut x, &mut push);
    }

    Ok(ColdSpotSet {
        n,
        intervals: merge(spans),
        delta: cfg.delta,
        chi: cfg.chi,
        rho: cfg.rho,
        theta,
        alpha_tot_log_n: m,
        cells,
        prefix_count,
        prefixes_used: used,
        capped,
    })
}

/// `#{i in H : i + 1 <= N, sigma(i) < sigma(i+1)}` (1-based `i`).
pub fn ascent_statistic(sigma: &Permutation, h: &ColdSpotSet) -> usize {
    let im = sigma.images();
    let n = im.len().min(h.n);
    h.intervals
        .iter()
        .map(|&(a, b)| (a..=b.min(n.saturating_sub(1))).filter(|&i| im[i - 1] < im[i]).count())
        .sum()
}

/// Rejects uniformity iff the ascent count on `H` exceeds
/// `|H|/2 + |H|^{1/2 + delta/2}`.
pub fn cold_spot_test(sigma: &Permutation, h: &ColdSpotSet, delta: f64) -> TestReport {
    let size = h.size() as f64;
    let threshold = size / 2.0 + size.powf(0.5 + delta / 2.0);
    TestReport::new(ascent_statistic(sigma, h) as f64, threshold)
}

/// Compact description of a cold-spot set for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColdSpotSummary {
    pub n: usize,
    pub size: usize,
    pub boundary: usize,
    pub components: usize,
    pub alpha_tot_log_n: usize,
    pub quotas: Vec<Vec<u64>>,
    pub prefix_count: u128,
    pub prefixes_used: usize,
    pub capped: bool,
    pub threshold: f64,
    pub satisfies_bounds: bool,
}

impl ColdSpotSet {
    pub fn summary(&self) -> ColdSpotSummary {
        ColdSpotSummary {
            n: self.n,
            size: self.size(),
            boundary: self.boundary(),
            components: self.intervals.len(),
            alpha_tot_log_n: self.alpha_tot_log_n,
            quotas: self.cells.iter().map(|c| c.quotas.clone()).collect(),
            prefix_count: self.prefix_count,
            prefixes_used: self.prefixes_used,
            capped: self.capped,
            threshold: self.threshold(),
            satisfies_bounds: self.satisfies_bounds(),
        }
    }
}

/// Rejection counts of the cold-spot test over seeded trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColdSpotTrials {
    pub trials: usize,
    /// Summary of the set built for the first trial.
    pub first: ColdSpotSummary,
    /// Distinct pile sequences (hence sets) met over the trials.
    pub distinct_sets: usize,
    pub all_sets_satisfy_bounds: bool,
    pub shuffled_rejections: Option<usize>,
    pub uniform_rejections: Option<usize>,
    pub shuffled_statistics: Vec<f64>,
    pub uniform_statistics: Vec<f64>,
}

impl ColdSpotTrials {
    pub fn shuffled_rate(&self) -> Option<f64> {
        self.shuffled_rejections.map(|r| r as f64 / self.trials as f64)
    }

    pub fn uniform_rate(&self) -> Option<f64> {
        self.uniform_rejections.map(|r| r as f64 / self.trials as f64)
    }
}

/// Runs the cold-spot test `trials` times. Trial `i` draws its pile sequence
/// from `key.child(i).named("piles")`, builds `H` for it, and tests a deck
/// shuffled with those piles (stream `"shuffled"`) and a uniform deck
/// (stream `"uniform"`), as selected by the two flags.
#[allow(clippy::too_many_arguments)]
pub fn cold_spot_trials(
    process: &CutProcess,
    disc: &Discretization,
    theta: f64,
    n: usize,
    k: usize,
    cfg: &ColdSpotConfig,
    trials: usize,
    key: StreamKey,
    shuffled: bool,
    uniform: bool,
) -> Result<ColdSpotTrials> {
    if trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    let piles: Vec<Vec<PileSizes>> = (0..trials as u64)
        .map(|i| process.pile_sequence(n, k, &mut key.child(i).named("piles").rng()))
        .collect::<Result<_>>()?;
    let mut sets: HashMap<&[PileSizes], usize> = HashMap::new();
    let mut built: Vec<ColdSpotSet> = Vec::new();
    let mut which = Vec::with_capacity(trials);
    for p in &piles {
        let idx = match sets.get(p.as_slice()) {
            Some(&i) => i,
            None => {
                built.push(build_cold_spots(p, disc, theta, cfg)?);
                sets.insert(p.as_slice(), built.len() - 1);
                built.len() - 1
            }
        };
        which.push(idx);
    }
    let run = |arm: &str| -> Result<Vec<f64>> {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = key.child(i as u64).named(arm).rng();
                let sigma = if arm == "shuffled" {
                    let g = sample_shuffle_graph(&piles[i], &mut rng)?;
                    graph_sort(&Permutation::uniform(n, &mut rng), &g)?
                } else {
                    Permutation::uniform(n, &mut rng)
                };
                Ok(ascent_statistic(&sigma, &built[which[i]]) as f64)
            })
            .collect()
    };
    let count = |stats: &[f64]| stats.iter().zip(&which).filter(|(s, &w)| **s > built[w].threshold()).count();
    let shuffled_statistics = if shuffled { run("shuffled")? } else { vec![] };
    let uniform_statistics = if uniform { run("uniform")? } else { vec![] };
    Ok(ColdSpotTrials {
        trials,
        first: built[which[0]].summary(),
        distinct_sets: built.len(),
        all_sets_satisfy_bounds: built.iter().all(|h| h.satisfies_bounds()),
        shuffled_rejections: shuffled.then(|| count(&shuffled_statistics)),
        uniform_rejections: uniform.then(|| count(&uniform_statistics)),
        shuffled_statistics,
        uniform_statistics,
    })
}
