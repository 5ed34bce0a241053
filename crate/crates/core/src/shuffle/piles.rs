//! Pile sizes and the processes that generate them.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::simplex::{Point, SimplexMeasure, SimplexPoint};

/// Card counts `(n_0, .., n_{k-1})` of one cut, top pile first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PileSizes {
    sizes: Vec<u64>,
}

impl PileSizes {
    pub fn new(sizes: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidProcess("no piles".into()));
        }
        Ok(PileSizes { sizes })
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn n(&self) -> u64 {
        self.sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Largest pile, lowest index on ties.
    pub fn l_max(&self) -> usize {
        let mut best = 0;
        for (l, &s) in self.sizes.iter().enumerate() {
            if s > self.sizes[best] {
                best = l;
            }
        }
        best
    }

    /// `n / N` as a point of the simplex.
    pub fn fractions(&self) -> Result<Point> {
        let n = self.n();
        if n == 0 {
            return Err(Error::AllZero);
        }
        SimplexPoint::normalized(self.sizes.iter().map(|&s| s as f64).collect())
    }

    pub(crate) fn check_total(&self, n: usize) -> Result<()> {
        if self.n() != n as u64 {
            return Err(Error::SizeMismatch { expected: n, got: self.n() as usize });
        }
        Ok(())
    }

    /// First position (0-based) of each pile.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.sizes
            .iter()
            .map(|&s| {
                let o = acc;
                acc += s as usize;
                o
            })
            .collect()
    }
}

/// How a measure-driven process turns the drawn `p` into integer piles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    /// `Mult(N, p)`.
    #[default]
    Multinomial,
    /// `floor(N p)` plus largest remainders.
    LargestRemainder,
}

/// Rule producing the pile sizes of step `t = 1, 2, ..`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutProcess {
    /// Fixed sizes, repeated cyclically if shorter than the run.
    Explicit { sequence: Vec<PileSizes> },
    /// IID `Mult(N, p)`; `p = (1/2, 1/2)` is the GSR shuffle.
    Multinomial { p: Vec<f64> },
    /// IID: draw `p ~ mu`, then round.
    Measure {
        mu: SimplexMeasure,
        #[serde(default)]
        rounding: Rounding,
    },
    /// Two piles, top pile size uniform on `{0, .., N}`.
    UniformCut,
    /// Two piles of sizes `floor(N/2)` and `N - floor(N/2)`.
    Bisection,
    /// Deterministic largest-remainder rounding of `N p` every step.
    Fractions { p: Vec<f64> },
    /// Step `t` follows rule `(t - 1) mod len` of the cycle.
    Periodic { cycle: Vec<CutProcess> },
}

/// Largest-remainder rounding of `n p` (ties to the lowest index).
pub fn largest_remainder(n: u64, p: &[f64]) -> Vec<u64> {
    let total: f64 = p.iter().sum();
    let exact: Vec<f64> = p.iter().map(|&x| n as f64 * x / total).collect();
    let mut out: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&i, &j| (exact[j] - exact[j].floor()).total_cmp(&(exact[i] - exact[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().cycle().take(n.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

fn multinomial<R: Rng + ?Sized>(n: u64, p: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = n;
    let mut mass: f64 = p.iter().sum();
    let mut out = Vec::with_capacity(p.len());
    for (i, &pi) in p.iter().enumerate() {
        let x = if i + 1 == p.len() || left == 0 {
            left
        } else {
            let q = (pi / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("probability in [0, 1]").sample(rng)
        };
        out.push(x);
        left -= x;
        mass -= pi;
    }
    out
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    SimplexPoint::new(p.to_vec()).map(|_| ()).map_err(|e| Error::InvalidProcess(e.to_string()))
}

impl CutProcess {
    pub fn gsr() -> Self {
        CutProcess::Multinomial { p: vec![0.5, 0.5] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CutProcess::Explicit { sequence } if sequence.is_empty() => {
                Err(Error::InvalidProcess("empty explicit sequence".into()))
            }
            CutProcess::Multinomial { p } | CutProcess::Fractions { p } => check_probabilities(p),
            CutProcess::Measure { mu, .. } => mu.validate().map_err(|e| Error::InvalidProcess(e.to_string())),
            CutProcess::Periodic { cycle } => {
                if cycle.is_empty() {
                    return Err(Error::InvalidProcess("empty periodic cycle".into()));
                }
                cycle.iter().try_for_each(|c| c.validate())
            }
            _ => Ok(()),
        }
    }

    /// Largest number of piles any step can use.
    pub fn k(&self) -> usize {
        match self {
            CutProcess::Explicit { sequence } => sequence.iter().map(|s| s.k()).max().unwrap_or(0),
            CutProcess::Multinomial { p } | CutProcess::Fractions { p } => p.len(),
            CutProcess::Measure { mu, .. } => mu.k(),
            CutProcess::UniformCut | CutProcess::Bisection => 2,
            CutProcess::Periodic { cycle } => cycle.iter().map(|c| c.k()).max().unwrap_or(0),
        }
    }

    /// Pile sizes of step `t >= 1` for a deck of `n` cards.
    pub fn cut_sizes<R: Rng + ?Sized>(&self, n: usize, t: usize, rng: &mut R) -> Result<PileSizes> {
        let n64 = n as u64;
        let sizes = match self {
            CutProcess::Explicit { sequence } => {
                if sequence.is_empty() {
                    return Err(Error::InvalidProcess("empty explicit sequence".into()));
                }
                let s = sequence[(t.max(1) - 1) % sequence.len()].clone();
                s.check_total(n)?;
                return Ok(s);
            }
            CutProcess::Multinomial { p } => multinomial(n64, p, rng),
            CutProcess::Measure { mu, rounding } => {
                let p = mu.sample(rng);
                match rounding {
                    Rounding::Multinomial => multinomial(n64, p.coords(), rng),
                    Rounding::LargestRemainder => largest_remainder(n64, p.coords()),
                }
            }
            CutProcess::UniformCut => {
                let top = rng.random_range(0..=n64);
                vec![top, n64 - top]
            }
            CutProcess::Bisection => vec![n64 / 2, n64 - n64 / 2],
            CutProcess::Fractions { p } => largest_remainder(n64, p),
            CutProcess::Periodic { cycle } => {
                if cycle.is_empty() {
                    return Err(Error::InvalidProcess("empty periodic cycle".into()));
                }
                let i = (t.max(1) - 1) % cycle.len();
                return cycle[i].cut_sizes(n, (t.max(1) - 1) / cycle.len() + 1, rng);
            }
        };
        PileSizes::new(sizes)
    }

    /// Pile sizes of steps `1..=k_steps`.
    pub fn pile_sequence<R: Rng + ?Sized>(&self, n: usize, k_steps: usize, rng: &mut R) -> Result<Vec<PileSizes>> {
        (1..=k_steps).map(|t| self.cut_sizes(n, t, rng)).collect()
    }

    /// Exact law of the step-`t` pile sizes, when it is finite and has
    /// rational weights (every kind except `measure`).
    pub fn exact_law<W: Field>(&self, n: usize, t: usize) -> Result<Vec<(PileSizes, W)>> {
        let n64 = n as u64;
        match self {
            CutProcess::Explicit { .. } | CutProcess::Bisection | CutProcess::Fractions { .. } => {
                let mut rng = crate::rng::StreamKey::new(0).rng();
                Ok(vec![(self.cut_sizes(n, t, &mut rng)?, W::one())])
            }
            CutProcess::UniformCut => Ok((0..=n64)
                .map(|top| (PileSizes { sizes: vec![top, n64 - top] }, W::from_ratio(1, n64 as i64 + 1)))
                .collect()),
            CutProcess::Multinomial { p } => {
                let probs: Vec<W> = p
                    .iter()
                    .map(|&x| W::from_f64(x).ok_or_else(|| Error::InvalidProcess(format!("bad probability {x}"))))
                    .collect::<Result<_>>()?;
                let mut out = Vec::new();
                for sizes in compositions(n64, p.len()) {
                    let mut w = multinomial_coefficient::<W>(&sizes);
                    for (pi, &s) in probs.iter().zip(&sizes) {
                        for _ in 0..s {
                            w = w * pi.clone();
                        }
                    }
                    if !w.is_zero() {
                        out.push((PileSizes { sizes }, w));
                    }
                }
                Ok(out)
            }
            CutProcess::Periodic { cycle } => {
                if cycle.is_empty() {
                    return Err(Error::InvalidProcess("empty periodic cycle".into()));
                }
                let i = (t.max(1) - 1) % cycle.len();
                cycle[i].exact_law(n, (t.max(1) - 1) / cycle.len() + 1)
            }
            CutProcess::Measure { .. } => {
                Err(Error::InvalidProcess("measure-driven cuts have no finite exact law".into()))
            }
        }
    }

    /// Accepts the JSON form or a short form:
    /// `gsr`, `uniform_cut`, `bisection`, `multinomial:0.5,0.5`,
    /// `fractions:1/3,2/3`, `explicit:3,2;2,3`, `measure:<measure>`,
    /// `periodic:<process>|<process>|..`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let proc = if text.starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), e)))?
        } else {
            let (head, rest) = text.split_once(':').unwrap_or((text, ""));
            match head {
                "gsr" => Self::gsr(),
                "uniform_cut" => CutProcess::UniformCut,
                "bisection" => CutProcess::Bisection,
                "multinomial" => CutProcess::Multinomial { p: parse_numbers(rest)? },
                "fractions" => CutProcess::Fractions { p: parse_numbers(rest)? },
                "explicit" => CutProcess::Explicit {
                    sequence: rest
                        .split(';')
                        .map(|s| {
                            let sizes = s
                                .split(',')
                                .map(|x| x.trim().parse::<u64>().map_err(|e| Error::Parse(format!("{x:?}: {e}"))))
                                .collect::<Result<Vec<_>>>()?;
                            PileSizes::new(sizes)
                        })
                        .collect::<Result<_>>()?,
                },
                "measure" => CutProcess::Measure { mu: SimplexMeasure::parse(rest)?, rounding: Rounding::Multinomial },
                "periodic" => CutProcess::Periodic { cycle: rest.split('|').map(Self::parse).collect::<Result<_>>()? },
                _ => return Err(Error::Parse(format!("unknown process {head:?}"))),
            }
        };
        proc.validate()?;
        Ok(proc)
    }
}

/// Numbers separated by commas; each may be a fraction `a/b`.
fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            let bad = || Error::Parse(format!("bad number {x:?}"));
            match x.split_once('/') {
                Some((a, b)) => Ok(a.trim().parse::<f64>().map_err(|_| bad())? / b.trim().parse::<f64>().map_err(|_| bad())?),
                None => x.parse().map_err(|_| bad()),
            }
        })
        .collect()
}

/// All `k`-tuples of nonnegative integers summing to `n`, lexicographically.
pub fn compositions(n: u64, k: usize) -> Vec<Vec<u64>> {
    fn rec(n: u64, k: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if k == 1 {
            cur.push(n);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=n {
            cur.push(a);
            rec(n - a, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// `N! / prod n_l!` in the field `W`.
pub fn multinomial_coefficient<W: Field>(sizes: &[u64]) -> W {
    let mut w = W::one();
    let mut total = 0i64;
    for &s in sizes {
        for j in 1..=s as i64 {
            total += 1;
            w = w * W::from_ratio(total, j);
        }
    }
    w
}

/// CSV trace `t,n_0,..,n_{k-1}` with `t` starting at 1.
pub fn trace_csv(piles: &[PileSizes]) -> String {
    let k = piles.iter().map(|p| p.k()).max().unwrap_or(0);
    let mut out = String::from("t");
    for l in 0..k {
        let _ = write!(out, ",n_{l}");
    }
    out.push('\n');
    for (t, p) in piles.iter().enumerate() {
        let _ = write!(out, "{}", t + 1);
        for l in 0..k {
            let _ = write!(out, ",{}", p.sizes().get(l).copied().unwrap_or(0));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use num_rational::BigRational;

    #[test]
    fn deterministic_rules() {
        let mut rng = StreamKey::new(0).rng();
        assert_eq!(CutProcess::Bisection.cut_sizes(52, 1, &mut rng).unwrap().sizes(), &[26, 26]);
        assert_eq!(CutProcess::Bisection.cut_sizes(5, 1, &mut rng).unwrap().sizes(), &[2, 3]);
        let e = CutProcess::parse("explicit:3,2").unwrap();
        assert_eq!(e.cut_sizes(5, 1, &mut rng).unwrap().sizes(), &[3, 2]);
        assert!(matches!(e.cut_sizes(6, 1, &mut rng), Err(Error::SizeMismatch { .. })));
        let f = CutProcess::parse("fractions:1/3,2/3").unwrap();
        assert_eq!(f.cut_sizes(6, 1, &mut rng).unwrap().sizes(), &[2, 4]);
        assert_eq!(f.cut_sizes(7, 1, &mut rng).unwrap().sizes(), &[2, 5]);
    }

    #[test]
    fn periodic_alternates() {
        let p = CutProcess::parse("periodic:fractions:1/3,2/3|bisection").unwrap();
        let mut rng = StreamKey::new(0).rng();
        let seq = p.pile_sequence(6, 4, &mut rng).unwrap();
        let got: Vec<_> = seq.iter().map(|s| s.sizes().to_vec()).collect();
        assert_eq!(got, vec![vec![2, 4], vec![3, 3], vec![2, 4], vec![3, 3]]);
    }

    #[test]
    fn multinomial_concentrates() {
        let p = CutProcess::gsr();
        let n = 1_000_000usize;
        let key = StreamKey::new(11);
        let sd = (n as f64 / 4.0).sqrt();
        let inside = (0..1000)
            .filter(|&i| {
                let s = p.cut_sizes(n, 1, &mut key.child(i).rng()).unwrap();
                (s.sizes()[0] as f64 - 500_000.0).abs() <= 3.0 * sd
            })
            .count();
        assert!(inside >= 990, "{inside}");
    }

    #[test]
    fn every_rule_sums_to_n() {
        let rules = [
            "gsr",
            "uniform_cut",
            "bisection",
            "multinomial:0.2,0.3,0.5",
            "measure:beta:2,2",
            "measure:dirichlet:1,1,1",
            "periodic:gsr|uniform_cut",
        ];
        let mut rng = StreamKey::new(4).rng();
        for r in rules {
            let p = CutProcess::parse(r).unwrap();
            for n in [1usize, 2, 17, 1000] {
                for t in 1..5 {
                    assert_eq!(p.cut_sizes(n, t, &mut rng).unwrap().n(), n as u64, "{r}");
                }
            }
        }
    }

    #[test]
    fn exact_laws_sum_to_one() {
        for r in ["gsr", "uniform_cut", "bisection", "multinomial:0.25,0.25,0.5", "periodic:gsr|bisection"] {
            let p = CutProcess::parse(r).unwrap();
            for t in 1..3 {
                let law = p.exact_law::<BigRational>(5, t).unwrap();
                let total = law.iter().fold(BigRational::from_ratio(0, 1), |s, (_, w)| s + w.clone());
                assert_eq!(total, BigRational::from_ratio(1, 1), "{r}");
            }
        }
        assert!(CutProcess::parse("measure:beta:1,1").unwrap().exact_law::<f64>(3, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = CutProcess::Periodic { cycle: vec![CutProcess::gsr(), CutProcess::UniformCut] };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(CutProcess::parse(&s).unwrap(), p);
        let m: CutProcess = serde_json::from_str(r#"{"kind":"measure","mu":{"kind":"beta","a":1,"b":1}}"#).unwrap();
        assert!(matches!(m, CutProcess::Measure { rounding: Rounding::Multinomial, .. }));
        let err = CutProcess::parse("{\"kind\": \"nope\"}").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn l_max_prefers_lowest_index() {
        assert_eq!(PileSizes::new(vec![3, 3, 1]).unwrap().l_max(), 0);
        assert_eq!(PileSizes::new(vec![1, 3, 3]).unwrap().l_max(), 1);
    }

    #[test]
    fn trace_layout() {
        let seq = vec![PileSizes::new(vec![3, 2]).unwrap(), PileSizes::new(vec![1, 1, 3]).unwrap()];
        assert_eq!(trace_csv(&seq), "t,n_0,n_1,n_2\n1,3,2,0\n2,1,1,3\n");
    }

    #[test]
    fn multinomial_coefficients() {
        assert_eq!(multinomial_coefficient::<BigRational>(&[2, 1]), BigRational::from_ratio(3, 1));
        assert_eq!(multinomial_coefficient::<f64>(&[2, 2, 1]), 30.0);
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }
}
