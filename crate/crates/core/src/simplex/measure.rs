use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::point::SimplexPoint;
use super::quadrature::gauss_legendre_on;
use crate::error::{Error, Result};
use crate::rng::StreamKey;

pub type Point = SimplexPoint<f64>;

/// Numerical budget for expectations against a measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub quadrature_nodes: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { quadrature_nodes: 256, mc_samples: 1_000_000, seed: 0x5EED }
    }
}

impl PrecisionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.quadrature_nodes < 2 {
            return Err(Error::InvalidConfig("quadrature_nodes must be >= 2".into()));
        }
        if self.mc_samples < 1 {
            return Err(Error::InvalidConfig("mc_samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Probability measure on the simplex `D_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimplexMeasure {
    #[serde(rename = "point")]
    PointMass { coords: Point },
    #[serde(rename = "mixture")]
    FiniteMixture { weights: Vec<f64>, atoms: Vec<Point> },
    /// `p = (q, 1 - q)` with `q ~ Beta(a, b)`.
    Beta { a: f64, b: f64 },
    Dirichlet { alphas: Vec<f64> },
    /// `p = (q, 1 - q)` with `q` uniform on `[lo, hi]`.
    UniformInterval { lo: f64, hi: f64 },
    Empirical { samples: Vec<Point> },
}

impl SimplexMeasure {
    pub fn point(coords: Vec<f64>) -> Result<Self> {
        Ok(SimplexMeasure::PointMass { coords: SimplexPoint::new(coords)? })
    }

    pub fn uniform_point(k: usize) -> Self {
        SimplexMeasure::PointMass { coords: SimplexPoint::uniform(k) }
    }

    pub fn mixture(weights: Vec<f64>, atoms: Vec<Point>) -> Result<Self> {
        let m = SimplexMeasure::FiniteMixture { weights, atoms };
        m.validate()?;
        Ok(m)
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        let m = SimplexMeasure::Beta { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn dirichlet(alphas: Vec<f64>) -> Result<Self> {
        let m = SimplexMeasure::Dirichlet { alphas };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform_interval(lo: f64, hi: f64) -> Result<Self> {
        let m = SimplexMeasure::UniformInterval { lo, hi };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidMeasure(s));
        match self {
            SimplexMeasure::PointMass { coords } => SimplexPoint::new(coords.coords().to_vec()).map(|_| ()),
            SimplexMeasure::FiniteMixture { weights, atoms } => {
                if weights.is_empty() || weights.len() != atoms.len() {
                    return bad("mixture needs one weight per atom".into());
                }
                if weights.iter().any(|w| !(*w >= 0.0)) {
                    return bad("mixture weights must be nonnegative".into());
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("mixture weights sum to {total}"));
                }
                let k = atoms[0].k();
                if atoms.iter().any(|a| a.k() != k) {
                    return bad("atoms have different dimensions".into());
                }
                atoms.iter().try_for_each(|a| SimplexPoint::new(a.coords().to_vec()).map(|_| ()))
            }
            SimplexMeasure::Beta { a, b } => {
                if *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    bad(format!("Beta parameters must be positive, got ({a}, {b})"))
                }
            }
            SimplexMeasure::Dirichlet { alphas } => {
                if alphas.len() < 2 || alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    bad("Dirichlet needs at least two positive concentrations".into())
                } else {
                    Ok(())
                }
            }
            SimplexMeasure::UniformInterval { lo, hi } => {
                if 0.0 <= *lo && lo < hi && *hi <= 1.0 {
                    Ok(())
                } else {
                    bad(format!("interval [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"))
                }
            }
            SimplexMeasure::Empirical { samples } => {
                if samples.is_empty() {
                    return bad("empirical measure needs samples".into());
                }
                let k = samples[0].k();
                if samples.iter().any(|s| s.k() != k) {
                    return bad("samples have different dimensions".into());
                }
                samples.iter().try_for_each(|s| SimplexPoint::new(s.coords().to_vec()).map(|_| ()))
            }
        }
    }

    /// Dimension `k` of the simplex the measure lives on.
    pub fn k(&self) -> usize {
        match self {
            SimplexMeasure::PointMass { coords } => coords.k(),
            SimplexMeasure::FiniteMixture { atoms, .. } => atoms[0].k(),
            SimplexMeasure::Beta { .. } | SimplexMeasure::UniformInterval { .. } => 2,
            SimplexMeasure::Dirichlet { alphas } => alphas.len(),
            SimplexMeasure::Empirical { samples } => samples[0].k(),
        }
    }

    /// `mu(V_k) < 1`.
    pub fn is_non_degenerate(&self) -> bool {
        match self {
            SimplexMeasure::PointMass { coords } => !coords.is_vertex(),
            SimplexMeasure::FiniteMixture { weights, atoms } => {
                weights.iter().zip(atoms).any(|(w, a)| *w > 0.0 && !a.is_vertex())
            }
            SimplexMeasure::Empirical { samples } => samples.iter().any(|s| !s.is_vertex()),
            _ => true,
        }
    }

    /// Short label used in tables.
    pub fn label(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        match self {
            SimplexMeasure::PointMass { coords } => format!("point({})", list(coords.coords())),
            SimplexMeasure::FiniteMixture { atoms, .. } => format!("mixture({} atoms)", atoms.len()),
            SimplexMeasure::Beta { a, b } => format!("Beta({a},{b})"),
            SimplexMeasure::Dirichlet { alphas } => format!("Dirichlet({})", list(alphas)),
            SimplexMeasure::UniformInterval { lo, hi } => format!("Uniform[{lo},{hi}]"),
            SimplexMeasure::Empirical { samples } => format!("empirical({} samples)", samples.len()),
        }
    }

    /// Parses either a JSON document (`{"kind": ...}`) or the short form
    /// `kind:params`, e.g. `beta:1,1`, `dirichlet:1,1,1`, `point:0.5,0.5`,
    /// `uniform_interval:0.25,0.75`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let m: SimplexMeasure = if text.starts_with('{') {
            serde_json::from_str(text).map_err(|e| {
                Error::Parse(format!("measure JSON at line {} column {}: {e}", e.line(), e.column()))
            })?
        } else {
            let (kind, params) = text.split_once(':').unwrap_or((text, ""));
            let nums: Vec<f64> = if params.is_empty() {
                Vec::new()
            } else {
                params
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse(format!("measure parameters '{params}': {e}")))?
            };
            match (kind, nums.as_slice()) {
                ("beta", [a, b]) => SimplexMeasure::Beta { a: *a, b: *b },
                ("dirichlet", a) => SimplexMeasure::Dirichlet { alphas: a.to_vec() },
                ("point", c) => SimplexMeasure::PointMass { coords: SimplexPoint::new(c.to_vec())? },
                ("uniform_point", [k]) if *k >= 1.0 => SimplexMeasure::uniform_point(*k as usize),
                ("uniform_interval", [lo, hi]) => SimplexMeasure::UniformInterval { lo: *lo, hi: *hi },
                ("uniform_cut", []) => SimplexMeasure::Beta { a: 1.0, b: 1.0 },
                _ => return Err(Error::Parse(format!("unrecognised measure '{text}'"))),
            }
        };
        m.validate()?;
        Ok(m)
    }

    /// Draws `p ~ mu`. Continuous variants redraw the (probability zero)
    /// exact vertices that floating point can produce.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            SimplexMeasure::PointMass { coords } => coords.clone(),
            SimplexMeasure::FiniteMixture { weights, atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, a) in weights.iter().zip(atoms) {
                    acc += w;
                    if u < acc {
                        return a.clone();
                    }
                }
                // Rounding left u above the cumulative total: last positive atom.
                let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
                atoms[last].clone()
            }
            SimplexMeasure::Beta { a, b } => {
                let d = Beta::new(*a, *b).expect("validated");
                loop {
                    let q: f64 = d.sample(rng);
                    if q > 0.0 && q < 1.0 {
                        return binary_point(q);
                    }
                }
            }
            SimplexMeasure::Dirichlet { alphas } => {
                let gammas: Vec<Gamma<f64>> =
                    alphas.iter().map(|a| Gamma::new(*a, 1.0).expect("validated")).collect();
                loop {
                    let g: Vec<f64> = gammas.iter().map(|d| d.sample(rng)).collect();
                    let s: f64 = g.iter().sum();
                    if s > 0.0 && g.iter().all(|x| *x < s) {
                        if let Ok(p) = SimplexPoint::normalized(g) {
                            if !p.is_vertex() {
                                return p;
                            }
                        }
                    }
                }
            }
            SimplexMeasure::UniformInterval { lo, hi } => loop {
                let q = lo + (hi - lo) * rng.random::<f64>();
                if q > 0.0 && q < 1.0 {
                    return binary_point(q);
                }
            },
            SimplexMeasure::Empirical { samples } => samples[rng.random_range(0..samples.len())].clone(),
        }
    }
}

pub(crate) fn binary_point(q: f64) -> Point {
    SimplexPoint::new(vec![q, 1.0 - q]).expect("q in [0, 1]")
}

/// Point drawn from `mu` with an explicit stream.
pub fn sample_point<R: Rng + ?Sized>(mu: &SimplexMeasure, rng: &mut R) -> Point {
    mu.sample(rng)
}

/// How an expectation was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Finite support summed exactly.
    Exact,
    Quadrature { nodes: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

/// Approximation of `E_mu[g]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Monte-Carlo standard error; zero for deterministic rules.
    pub std_error: f64,
    pub kind: RuleKind,
}

/// A discrete rule `sum_i w_i g(p_i)` approximating integration against `mu`.
///
/// Monte-Carlo rules hold their sample, so repeated expectations (e.g. the
/// theta bisection) use common random numbers.
#[derive(Clone, Debug)]
pub struct IntegrationRule {
    points: Vec<Point>,
    weights: Vec<f64>,
    kind: RuleKind,
}

impl IntegrationRule {
    pub fn new(mu: &SimplexMeasure, cfg: &PrecisionConfig) -> Result<Self> {
        mu.validate()?;
        cfg.validate()?;
        let n = cfg.quadrature_nodes;
        let rule = match mu {
            SimplexMeasure::PointMass { coords } => IntegrationRule {
                points: vec![coords.clone()],
                weights: vec![1.0],
                kind: RuleKind::Exact,
            },
            SimplexMeasure::FiniteMixture { weights, atoms } => {
                let (points, weights) = atoms
                    .iter()
                    .zip(weights)
                    .filter(|(_, w)| **w > 0.0)
                    .map(|(a, w)| (a.clone(), *w))
                    .unzip();
                IntegrationRule { points, weights, kind: RuleKind::Exact }
            }
            SimplexMeasure::Empirical { samples } => {
                let w = 1.0 / samples.len() as f64;
                IntegrationRule { points: samples.clone(), weights: vec![w; samples.len()], kind: RuleKind::Exact }
            }
            SimplexMeasure::Beta { a, b } => beta_rule(*a, *b, n),
            SimplexMeasure::UniformInterval { lo, hi } => {
                let mut points = Vec::with_capacity(2 * n);
                let mut weights = Vec::with_capacity(2 * n);
                let pieces: Vec<(f64, f64)> = if *lo < 0.5 && *hi > 0.5 {
                    vec![(*lo, 0.5), (0.5, *hi)]
                } else {
                    vec![(*lo, *hi)]
                };
                for (l, h) in pieces {
                    for (q, w) in gauss_legendre_on(n, l, h) {
                        points.push(binary_point(q));
                        weights.push(w / (hi - lo));
                    }
                }
                IntegrationRule { points, weights, kind: RuleKind::Quadrature { nodes: n } }
            }
            SimplexMeasure::Dirichlet { .. } => {
                let mut rng = StreamKey::new(cfg.seed).named("expectation").rng();
                let points: Vec<Point> = (0..cfg.mc_samples).map(|_| mu.sample(&mut rng)).collect();
                let w = 1.0 / cfg.mc_samples as f64;
                IntegrationRule {
                    points,
                    weights: vec![w; cfg.mc_samples],
                    kind: RuleKind::MonteCarlo { samples: cfg.mc_samples, seed: cfg.seed },
                }
            }
        };
        Ok(rule)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn expect<G: Fn(&Point) -> f64>(&self, g: G) -> Estimate {
        let values = self.points.iter().map(&g);
        self.combine(values)
    }

    /// Expectation of precomputed per-point values.
    pub fn combine<I: IntoIterator<Item = f64>>(&self, values: I) -> Estimate {
        let mut mean = 0.0;
        let mut sq = 0.0;
        for (v, w) in values.into_iter().zip(&self.weights) {
            mean += w * v;
            sq += w * v * v;
        }
        let std_error = match self.kind {
            RuleKind::MonteCarlo { samples, .. } if samples > 1 => {
                let var = (sq - mean * mean).max(0.0) * samples as f64 / (samples - 1) as f64;
                (var / samples as f64).sqrt()
            }
            _ => 0.0,
        };
        Estimate { value: mean, std_error, kind: self.kind }
    }
}

/// Beta(a, b) rule: split at 1/2 and substitute `q = u^(2/a)` on the left,
/// `1 - q = u^(2/b)` on the right, which removes the endpoint power
/// singularities of the density. Weights are normalised by the rule itself.
fn beta_rule(a: f64, b: f64, n: usize) -> IntegrationRule {
    let mut points = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(2 * n);
    // Left half: q^(a-1) dq = (2/a) u du.
    for (u, w) in gauss_legendre_on(n, 0.0, 0.5f64.powf(a / 2.0)) {
        let q = u.powf(2.0 / a);
        if q <= 0.0 || q >= 1.0 {
            continue;
        }
        points.push(binary_point(q));
        weights.push(w * (2.0 / a) * u * (1.0 - q).powf(b - 1.0));
    }
    for (u, w) in gauss_legendre_on(n, 0.0, 0.5f64.powf(b / 2.0)) {
        let r = u.powf(2.0 / b);
        if r <= 0.0 || r >= 1.0 {
            continue;
        }
        points.push(SimplexPoint::new(vec![1.0 - r, r]).expect("r in (0, 1)"));
        weights.push(w * (2.0 / b) * u * (1.0 - r).powf(a - 1.0));
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    IntegrationRule { points, weights, kind: RuleKind::Quadrature { nodes: n } }
}

/// `E_mu[g(p)]`, by quadrature (Beta, uniform interval), Monte Carlo
/// (Dirichlet) or exact summation (finite supports).
pub fn expect_functional<G: Fn(&Point) -> f64>(
    mu: &SimplexMeasure,
    g: G,
    cfg: &PrecisionConfig,
) -> Result<Estimate> {
    let est = IntegrationRule::new(mu, cfg)?.expect(g);
    if !est.value.is_finite() {
        return Err(Error::DegenerateMeasure);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig { quadrature_nodes: 256, mc_samples: 100_000, seed: 11 }
    }

    #[test]
    fn point_mass_sampling_and_expectation() {
        let mu = SimplexMeasure::point(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let mut rng = StreamKey::new(1).rng();
        for _ in 0..5 {
            assert_eq!(sample_point(&mu, &mut rng).coords(), &[1.0 / 3.0, 2.0 / 3.0]);
        }
        let g = |p: &Point| p.coords()[0].sin() + p.coords()[1] * 3.0;
        let e = expect_functional(&mu, g, &cfg()).unwrap();
        assert_eq!(e.value, g(&SimplexPoint::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap()));
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn degenerate_weight_always_picks_first_atom() {
        let a = SimplexPoint::new(vec![0.3, 0.7]).unwrap();
        let b = SimplexPoint::new(vec![0.9, 0.1]).unwrap();
        let mu = SimplexMeasure::mixture(vec![1.0, 0.0], vec![a.clone(), b]).unwrap();
        let mut rng = StreamKey::new(2).rng();
        for _ in 0..1000 {
            assert_eq!(sample_point(&mu, &mut rng), a);
        }
    }

    #[test]
    fn mixture_expectation_is_linear() {
        let p = SimplexPoint::new(vec![0.3, 0.7]).unwrap();
        let q = SimplexPoint::new(vec![0.9, 0.1]).unwrap();
        let mu = SimplexMeasure::mixture(vec![0.5, 0.5], vec![p.clone(), q.clone()]).unwrap();
        let g = |x: &Point| (x.coords()[0] * 7.0).exp();
        let e = expect_functional(&mu, g, &cfg()).unwrap().value;
        assert!((e - 0.5 * (g(&p) + g(&q))).abs() < 1e-12);
    }

    #[test]
    fn beta_uniform_sample_mean() {
        let mu = SimplexMeasure::beta(1.0, 1.0).unwrap();
        let mut rng = StreamKey::new(3).rng();
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| mu.sample(&mut rng).coords()[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn beta_log_max_closed_form() {
        // 2 * int_{1/2}^1 -log q dq = 1 - log 2.
        let mu = SimplexMeasure::beta(1.0, 1.0).unwrap();
        let e = expect_functional(&mu, |p| -p.p_max().0.ln(), &cfg()).unwrap().value;
        assert!((e - (1.0 - 2f64.ln())).abs() < 1e-12, "{e}");
        assert!((1.0 / e - 3.256).abs() < 0.005);
    }

    #[test]
    fn beta_rule_moments() {
        // E[q] = a/(a+b), E[q^2] = a(a+1)/((a+b)(a+b+1)).
        for (a, b) in [(0.5, 0.5), (2.0, 16.0), (2.0, 2.0), (0.3, 4.0)] {
            let mu = SimplexMeasure::beta(a, b).unwrap();
            let m1 = expect_functional(&mu, |p| p.coords()[0], &cfg()).unwrap().value;
            let m2 = expect_functional(&mu, |p| p.coords()[0].powi(2), &cfg()).unwrap().value;
            assert!((m1 - a / (a + b)).abs() < 1e-9, "({a},{b}) m1 {m1}");
            assert!((m2 - a * (a + 1.0) / ((a + b) * (a + b + 1.0))).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_is_converged_at_default_nodes() {
        let g = |p: &Point| -(p.coords()[0].powi(2) + p.coords()[1].powi(2)).ln();
        for mu in [
            SimplexMeasure::beta(1.0, 1.0).unwrap(),
            SimplexMeasure::beta(0.5, 0.5).unwrap(),
            SimplexMeasure::beta(2.0, 16.0).unwrap(),
            SimplexMeasure::uniform_interval(0.25, 0.75).unwrap(),
        ] {
            let c1 = PrecisionConfig { quadrature_nodes: 256, ..cfg() };
            let c2 = PrecisionConfig { quadrature_nodes: 512, ..cfg() };
            let a = expect_functional(&mu, g, &c1).unwrap().value;
            let b = expect_functional(&mu, g, &c2).unwrap().value;
            assert!((a - b).abs() < 1e-8, "{}: {a} vs {b}", mu.label());
        }
    }

    #[test]
    fn dirichlet_mc_reports_standard_error() {
        let mu = SimplexMeasure::dirichlet(vec![1.0, 1.0, 1.0]).unwrap();
        let e = expect_functional(&mu, |p| p.coords()[0], &cfg()).unwrap();
        assert!(e.std_error > 0.0 && e.std_error < 0.01);
        assert!((e.value - 1.0 / 3.0).abs() < 4.0 * e.std_error);
        let again = expect_functional(&mu, |p| p.coords()[0], &cfg()).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(SimplexMeasure::parse("beta:1,1").unwrap(), SimplexMeasure::Beta { a: 1.0, b: 1.0 });
        assert_eq!(SimplexMeasure::parse("point:0.5,0.5").unwrap().k(), 2);
        let j = r#"{"kind":"mixture","weights":[0.5,0.5],"atoms":[[0.5,0.5],[0.9,0.1]]}"#;
        assert_eq!(SimplexMeasure::parse(j).unwrap().k(), 2);
        let j = r#"{"kind":"dirichlet","alphas":[1,1,1]}"#;
        assert_eq!(SimplexMeasure::parse(j).unwrap().k(), 3);
        assert!(SimplexMeasure::parse(r#"{"kind":"beta","a":-1,"b":1}"#).is_err());
        let err = SimplexMeasure::parse("{\"kind\":\n\"beta\", }").unwrap_err();
        assert!(matches!(err, Error::Parse(ref s) if s.contains("line 2")), "{err}");
        assert!(SimplexMeasure::parse("nonsense:1").is_err());
    }

    #[test]
    fn degeneracy_flag() {
        assert!(!SimplexMeasure::point(vec![1.0, 0.0]).unwrap().is_non_degenerate());
        let v = SimplexPoint::vertex(2, 0);
        let h = SimplexPoint::uniform(2);
        assert!(!SimplexMeasure::mixture(vec![1.0, 0.0], vec![v.clone(), h.clone()]).unwrap().is_non_degenerate());
        assert!(SimplexMeasure::mixture(vec![0.5, 0.5], vec![v, h]).unwrap().is_non_degenerate());
        assert!(SimplexMeasure::beta(2.0, 2.0).unwrap().is_non_degenerate());
    }
}
