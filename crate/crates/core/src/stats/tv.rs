//! Monte-Carlo lower bounds on the total variation distance to uniform.
//!
//! For any event `A`, `d_TV(P, U) >= P(A) - U(A)`. The event is a threshold
//! on a statistic of the inverse deck `pi = X_K^{-1}`. Its direction and
//! threshold are picked on a pilot sample and the gap is then re-estimated
//! on fresh draws, with a Newcombe (hybrid Wilson) interval for the
//! difference of two proportions.
//!
//! Replicate `i` of each arm uses its own stream, so results do not depend on
//! the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coldspot::{ascent_statistic, ColdSpotSet};
use super::exact::{exact_process_distribution, exact_tv, MAX_EXACT_N};
use super::perm_stats::{descents, longest_increasing_run};
use super::TestReport;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::shuffle::{sample_inverse_deck, CutProcess, Permutation};

/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Statistic of the inverse deck `pi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    /// Rising sequences of the deck `X = pi^{-1}`, i.e. `1 + descents(pi)`.
    RisingSequences,
    /// Longest block of adjacent positions on which `pi` increases.
    LongestRun,
    /// Ascents of `pi` inside a cold-spot set.
    ColdSpotAscents { h: Box<ColdSpotSet> },
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::RisingSequences => "rising_sequences",
            Statistic::LongestRun => "longest_run",
            Statistic::ColdSpotAscents { .. } => "coldspot_ascents",
        }
    }

    /// `rising_sequences`, `longest_run` (the cold-spot form needs a set).
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "rising_sequences" | "rising" => Ok(Statistic::RisingSequences),
            "longest_run" | "run" => Ok(Statistic::LongestRun),
            other => Err(Error::Parse(format!("unknown statistic '{other}'"))),
        }
    }

    pub fn eval(&self, pi: &Permutation) -> f64 {
        match self {
            Statistic::RisingSequences => (1 + descents(pi)) as f64,
            Statistic::LongestRun => longest_increasing_run(pi) as f64,
            Statistic::ColdSpotAscents { h } => ascent_statistic(pi, h) as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Event `statistic >= threshold`.
    AtLeast,
    /// Event `statistic <= threshold`.
    AtMost,
}

impl Direction {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::AtLeast => value >= threshold,
            Direction::AtMost => value <= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvConfig {
    pub samples: usize,
    pub pilot: usize,
    pub z: f64,
}

impl Default for TvConfig {
    fn default() -> Self {
        TvConfig { samples: 10_000, pilot: 1000, z: Z_99 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvLowerBound {
    pub statistic: String,
    pub n: usize,
    pub k: usize,
    pub direction: Direction,
    pub threshold: f64,
    pub samples: usize,
    pub p_shuffled: f64,
    pub p_uniform: f64,
    /// `p_shuffled - p_uniform`.
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `ci_lo` clipped to `[0, 1]`.
    pub lower_bound: f64,
    /// Rejects "the shuffled deck is uniform" iff `ci_lo > 0`.
    pub report: TestReport,
}

/// Wilson score interval for `hits / n`.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Newcombe's hybrid score interval for `p1 - p2`.
pub fn newcombe_interval(h1: usize, n1: usize, h2: usize, n2: usize, z: f64) -> (f64, f64) {
    let p1 = h1 as f64 / n1 as f64;
    let p2 = h2 as f64 / n2 as f64;
    let (l1, u1) = wilson_interval(h1, n1, z);
    let (l2, u2) = wilson_interval(h2, n2, z);
    let d = p1 - p2;
    (d - ((p1 - l1).powi(2) + (u2 - p2).powi(2)).sqrt(), d + ((u1 - p1).powi(2) + (p2 - l2).powi(2)).sqrt())
}

/// Statistic values of `count` decks, replicate `i` drawn from `key.child(i)`.
/// Shuffled decks come from the inverse construction, uniform ones from
/// Fisher-Yates.
pub fn sample_statistic(
    process: Option<&CutProcess>,
    n: usize,
    k: usize,
    stat: &Statistic,
    count: usize,
    key: StreamKey,
) -> Result<Vec<f64>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.child(i).rng();
            let pi = match process {
                Some(p) => sample_inverse_deck(p, n, k, &mut rng)?,
                None => Permutation::uniform(n, &mut rng),
            };
            Ok(stat.eval(&pi))
        })
        .collect()
}

fn count_event(values: &[f64], dir: Direction, c: f64) -> usize {
    values.iter().filter(|&&v| dir.holds(v, c)).count()
}

/// Direction and threshold maximising the empirical gap; ties keep the
/// first candidate (`AtLeast` before `AtMost`, smaller thresholds first).
pub fn choose_event(shuffled: &[f64], uniform: &[f64]) -> (Direction, f64, f64) {
    let mut s = shuffled.to_vec();
    let mut u = uniform.to_vec();
    s.sort_by(f64::total_cmp);
    u.sort_by(f64::total_cmp);
    let mut cands: Vec<f64> = s.iter().chain(&u).copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let frac_below = |v: &[f64], c: f64, strict: bool| {
        let i = if strict { v.partition_point(|&x| x < c) } else { v.partition_point(|&x| x <= c) };
        i as f64 / v.len().max(1) as f64
    };
    let mut best = (Direction::AtLeast, cands.first().copied().unwrap_or(0.0), f64::NEG_INFINITY);
    for dir in [Direction::AtLeast, Direction::AtMost] {
        for &c in &cands {
            let gap = match dir {
                Direction::AtLeast => (1.0 - frac_below(&s, c, true)) - (1.0 - frac_below(&u, c, true)),
                Direction::AtMost => frac_below(&s, c, false) - frac_below(&u, c, false),
            };
            if gap > best.2 {
                best = (dir, c, gap);
            }
        }
    }
    best
}

/// Lower bound on `d_TV(P(process, K), uniform)` for decks of `n` cards.
pub fn tv_lower_bound_mc(
    process: &CutProcess,
    n: usize,
    k: usize,
    stat: &Statistic,
    cfg: &TvConfig,
    key: StreamKey,
) -> Result<TvLowerBound> {
    if cfg.samples == 0 || cfg.pilot == 0 {
        return Err(Error::InvalidConfig("sample counts must be positive".into()));
    }
    if let Statistic::ColdSpotAscents { h } = stat {
        if h.n != n {
            return Err(Error::SizeMismatch { expected: n, got: h.n });
        }
    }
    process.validate()?;
    let pilot = key.named("pilot");
    let ps = sample_statistic(Some(process), n, k, stat, cfg.pilot, pilot.named("shuffled"))?;
    let pu = sample_statistic(None, n, k, stat, cfg.pilot, pilot.named("uniform"))?;
    let (direction, threshold, _) = choose_event(&ps, &pu);

    let fs = sample_statistic(Some(process), n, k, stat, cfg.samples, key.named("shuffled"))?;
    let fu = sample_statistic(None, n, k, stat, cfg.samples, key.named("uniform"))?;
    let hs = count_event(&fs, direction, threshold);
    let hu = count_event(&fu, direction, threshold);
    let m = cfg.samples;
    let (ci_lo, ci_hi) = newcombe_interval(hs, m, hu, m, cfg.z);
    let p_shuffled = hs as f64 / m as f64;
    let p_uniform = hu as f64 / m as f64;
    let mut report = TestReport::new(ci_lo, 0.0);
    report.ci = Some((ci_lo, ci_hi));
    Ok(TvLowerBound {
        statistic: stat.name().to_string(),
        n,
        k,
        direction,
        threshold,
        samples: m,
        p_shuffled,
        p_uniform,
        estimate: p_shuffled - p_uniform,
        ci_lo,
        ci_hi,
        lower_bound: ci_lo.clamp(0.0, 1.0),
        report,
    })
}

/// One row of a cutoff scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub k: usize,
    pub k_over_log_n: f64,
    pub statistic: String,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub lower_bound: f64,
    pub c_bar: f64,
    /// Exact distance for decks of at most 7 cards with a finite cut law.
    pub exact_tv: Option<f64>,
}

pub const SCAN_CSV_HEADER: &str = "N,K,K_over_logN,statistic,estimate,ci_lo,ci_hi,lower_bound,C_bar,exact_tv";

impl ScanRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            self.n,
            self.k,
            self.k_over_log_n,
            self.statistic,
            self.estimate,
            self.ci_lo,
            self.ci_hi,
            self.lower_bound,
            self.c_bar,
            self.exact_tv.map_or(String::new(), |t| format!("{t:.6}"))
        )
    }
}

/// `K = round(m log N)`.
pub fn steps_for(multiple: f64, n: usize) -> usize {
    (multiple * (n as f64).ln()).round().max(0.0) as usize
}

/// Runs [`tv_lower_bound_mc`] over `ns x multiples`, `K = round(m log N)`.
/// Cell `(j, l)` draws from `key.child(j).child(l)`.
pub fn cutoff_scan(
    process: &CutProcess,
    c_bar: f64,
    ns: &[usize],
    multiples: &[f64],
    stat: &Statistic,
    cfg: &TvConfig,
    key: StreamKey,
) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for (j, &n) in ns.iter().enumerate() {
        let log_n = (n as f64).ln();
        let ks: Vec<usize> = multiples.iter().map(|&m| steps_for(m, n)).collect();
        let exact: Option<Vec<f64>> = if n <= 7 && n <= MAX_EXACT_N {
            let k_max = ks.iter().copied().max().unwrap_or(0);
            let mut laws = Vec::with_capacity(k_max + 1);
            let mut ok = true;
            for k in 0..=k_max {
                match exact_process_distribution::<f64>(process, n, k) {
                    Ok(d) => laws.push(exact_tv(&d)),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            ok.then_some(laws)
        } else {
            None
        };
        for (l, &k) in ks.iter().enumerate() {
            let b = tv_lower_bound_mc(process, n, k, stat, cfg, key.child(j as u64).child(l as u64))?;
            rows.push(ScanRow {
                n,
                k,
                k_over_log_n: k as f64 / log_n,
                statistic: b.statistic,
                estimate: b.estimate,
                ci_lo: b.ci_lo,
                ci_hi: b.ci_hi,
                lower_bound: b.lower_bound,
                c_bar,
                exact_tv: exact.as_ref().map(|e| e[k]),
            });
        }
    }
    Ok(rows)
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from(SCAN_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}
