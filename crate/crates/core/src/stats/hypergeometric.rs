//! `Hyp(n1, n, m)`: size of the intersection of two independent uniform
//! subsets of `[n]` of sizes `n1` and `m` (equivalently, successes among `m`
//! draws without replacement from `n` items of which `n1` are successes).
//!
//! Sampling is exact inversion of the CDF taken in order of decreasing
//! probability from the mode outwards, walking the pmf with the ratio
//! `q(k) = p(k+1)/p(k) = (m - k)(n1 - k) / ((k + 1)(n - n1 - m + k + 1))`.
//! Expected cost is `O(1 + sd)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Hypergeometric {
    n1: u64,
    n: u64,
    m: u64,
    lo: u64,
    hi: u64,
    mode: u64,
    p_mode: f64,
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Direct `P(X = k)` from log-factorials.
pub fn hypergeometric_pmf(n1: u64, n: u64, m: u64, k: u64) -> Result<f64> {
    check(n1, n, m)?;
    if k > n1 || k > m || m - k > n - n1 {
        return Ok(0.0);
    }
    Ok((ln_choose(n1, k) + ln_choose(n - n1, m - k) - ln_choose(n, m)).exp())
}

fn check(n1: u64, n: u64, m: u64) -> Result<()> {
    if n1 > n || m > n {
        return Err(Error::InvalidParams { n1, n, m });
    }
    Ok(())
}

impl Hypergeometric {
    pub fn new(n1: u64, n: u64, m: u64) -> Result<Self> {
        check(n1, n, m)?;
        let lo = (n1 + m).saturating_sub(n);
        let hi = n1.min(m);
        let mode = (((m + 1) as u128 * (n1 + 1) as u128 / (n + 2) as u128) as u64).clamp(lo, hi);
        let p_mode = hypergeometric_pmf(n1, n, m, mode)?;
        Ok(Hypergeometric { n1, n, m, lo, hi, mode, p_mode })
    }

    pub fn support(&self) -> (u64, u64) {
        (self.lo, self.hi)
    }

    pub fn mean(&self) -> f64 {
        self.n1 as f64 * self.m as f64 / self.n.max(1) as f64
    }

    pub fn variance(&self) -> f64 {
        let (n1, n, m) = (self.n1 as f64, self.n as f64, self.m as f64);
        if n < 2.0 {
            return 0.0;
        }
        m * (n1 / n) * (1.0 - n1 / n) * (n - m) / (n - 1.0)
    }

    /// `p(k+1) / p(k)`.
    pub fn ratio(&self, k: u64) -> f64 {
        let (n1, n, m, k) = (self.n1 as f64, self.n as f64, self.m as f64, k as f64);
        (m - k) * (n1 - k) / ((k + 1.0) * (n - n1 - m + k + 1.0))
    }

    /// `P(X = k)` by the ratio recurrence from the mode.
    pub fn pmf(&self, k: u64) -> f64 {
        if k < self.lo || k > self.hi {
            return 0.0;
        }
        let mut p = self.p_mode;
        if k >= self.mode {
            for j in self.mode..k {
                p *= self.ratio(j);
            }
        } else {
            for j in (k..self.mode).rev() {
                p /= self.ratio(j);
            }
        }
        p
    }

    /// `P(|X - EX| >= x)` by summing the pmf over the support.
    pub fn two_sided_tail(&self, x: f64) -> f64 {
        let mean = self.mean();
        let mut total = 0.0;
        let mut p = self.p_mode;
        for k in self.mode..=self.hi {
            if k > self.mode {
                p *= self.ratio(k - 1);
            }
            if (k as f64 - mean).abs() >= x {
                total += p;
            }
        }
        p = self.p_mode;
        for k in (self.lo..self.mode).rev() {
            p /= self.ratio(k);
            if (k as f64 - mean).abs() >= x {
                total += p;
            }
        }
        total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let mut u: f64 = rng.random::<f64>() - self.p_mode;
        if u < 0.0 {
            return self.mode;
        }
        let (mut up, mut down) = (self.mode, self.mode);
        let (mut p_up, mut p_down) = (self.p_mode, self.p_mode);
        loop {
            let next_up = if up < self.hi { p_up * self.ratio(up) } else { -1.0 };
            let next_down = if down > self.lo { p_down / self.ratio(down - 1) } else { -1.0 };
            if next_up < 0.0 && next_down < 0.0 {
                // Rounding left a sliver of mass unassigned.
                return self.mode;
            }
            if next_up >= next_down {
                up += 1;
                p_up = next_up;
                u -= p_up;
                if u < 0.0 {
                    return up;
                }
            } else {
                down -= 1;
                p_down = next_down;
                u -= p_down;
                if u < 0.0 {
                    return down;
                }
            }
        }
    }
}

pub fn hypergeometric_sample<R: Rng + ?Sized>(n1: u64, n: u64, m: u64, rng: &mut R) -> Result<u64> {
    Ok(Hypergeometric::new(n1, n, m)?.sample(rng))
}

/// Category counts of `draws` items taken without replacement from an urn
/// with `counts[l]` items of category `l`.
pub fn multivariate_hypergeometric<R: Rng + ?Sized>(counts: &[u64], draws: u64, rng: &mut R) -> Result<Vec<u64>> {
    let mut remaining: u64 = counts.iter().sum();
    if draws > remaining {
        return Err(Error::InvalidParams { n1: 0, n: remaining, m: draws });
    }
    let mut left = draws;
    let mut out = Vec::with_capacity(counts.len());
    for &c in counts {
        let x = if left == 0 {
            0
        } else if c == remaining {
            left
        } else {
            Hypergeometric::new(c, remaining, left)?.sample(rng)
        };
        out.push(x);
        left -= x;
        remaining -= c;
    }
    Ok(out)
}

/// Empirical two-sided tail at distance `EX^{1/2 + a}` against the exact tail
/// and the Hush-Scovel bound `exp(-2 alpha (x^2 - 1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n1: u64,
    pub n: u64,
    pub m: u64,
    pub a: f64,
    pub mean: f64,
    pub distance: f64,
    pub trials: u64,
    pub hits: u64,
    pub frequency: f64,
    pub std_error: f64,
    pub exact_tail: f64,
    pub hush_scovel_bound: f64,
}

pub fn hush_scovel_alpha(n1: u64, n: u64, m: u64) -> f64 {
    let f = |a: u64| 1.0 / (n - a + 1) as f64 + 1.0 / (a + 1) as f64;
    f(n1).max(f(m))
}

pub fn concentration_report<R: Rng + ?Sized>(
    n1: u64,
    n: u64,
    m: u64,
    trials: u64,
    a: f64,
    rng: &mut R,
) -> Result<ConcentrationReport> {
    let h = Hypergeometric::new(n1, n, m)?;
    let mean = h.mean();
    let distance = mean.powf(0.5 + a);
    let hits = (0..trials).filter(|_| (h.sample(rng) as f64 - mean).abs() >= distance).count() as u64;
    let frequency = hits as f64 / trials.max(1) as f64;
    let bound = if distance > 2.0 {
        (-2.0 * hush_scovel_alpha(n1, n, m) * (distance * distance - 1.0)).exp().min(1.0)
    } else {
        1.0
    };
    Ok(ConcentrationReport {
        n1,
        n,
        m,
        a,
        mean,
        distance,
        trials,
        hits,
        frequency,
        std_error: (frequency * (1.0 - frequency) / trials.max(1) as f64).sqrt(),
        exact_tail: h.two_sided_tail(distance),
        hush_scovel_bound: bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn degenerate_parameters() {
        let mut rng = StreamKey::new(1).rng();
        for _ in 0..100 {
            assert_eq!(hypergeometric_sample(7, 7, 4, &mut rng).unwrap(), 4);
            assert_eq!(hypergeometric_sample(3, 9, 0, &mut rng).unwrap(), 0);
            assert_eq!(hypergeometric_sample(0, 9, 5, &mut rng).unwrap(), 0);
            assert_eq!(hypergeometric_sample(3, 9, 9, &mut rng).unwrap(), 3);
        }
        assert_eq!(Hypergeometric::new(10, 5, 1), Err(Error::InvalidParams { n1: 10, n: 5, m: 1 }));
    }

    #[test]
    fn pmf_sums_to_one() {
        let h = Hypergeometric::new(30, 100, 45).unwrap();
        let (lo, hi) = h.support();
        let s: f64 = (lo..=hi).map(|k| h.pmf(k)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((h.two_sided_tail(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recurrence_matches_direct_pmf() {
        let h = Hypergeometric::new(400, 1000, 300).unwrap();
        for k in [60, 100, 120, 140, 200] {
            let d = hypergeometric_pmf(400, 1000, 300, k).unwrap();
            assert!(((h.pmf(k) - d) / d).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn sample_frequencies_match_pmf() {
        let h = Hypergeometric::new(5, 12, 6).unwrap();
        let mut rng = StreamKey::new(9).rng();
        let trials = 200_000;
        let mut counts = [0u32; 6];
        for _ in 0..trials {
            counts[h.sample(&mut rng) as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = h.pmf(k as u64);
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((c as f64 / trials as f64 - p).abs() < 5.0 * se + 1e-9, "k={k}");
        }
    }

    #[test]
    fn multivariate_counts_add_up() {
        let mut rng = StreamKey::new(2).rng();
        for _ in 0..200 {
            let x = multivariate_hypergeometric(&[5, 0, 7, 3], 9, &mut rng).unwrap();
            assert_eq!(x.iter().sum::<u64>(), 9);
            assert_eq!(x[1], 0);
            assert!(x[0] <= 5 && x[2] <= 7 && x[3] <= 3);
        }
        assert!(multivariate_hypergeometric(&[1, 1], 3, &mut rng).is_err());
    }
}
