//! Mixing-time constants of a cut measure `mu`.
//!
//! For `p` on the simplex, `phi_p(x) = sum_i p_i^x` and `psi_p(x) = -log phi_p(x)`;
//! `psi_mu = E_mu psi_p`. The exponent `theta_mu` solves
//! `psi_mu(theta) = 2 psi_mu(2)` on `[3, 4)`, and
//!
//! ```text
//! C_mu       = (3 + theta_mu) / (4 psi_mu(2))
//! C~_mu      = 1 / E_mu log(1 / p_max)
//! C-bar_mu   = max(C_mu, C~_mu)
//! ```
//!
//! `C-bar_mu log N` is the cutoff location for `mu`-like riffle shuffles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::bisect_increasing;
use crate::scalar::Real;
use crate::simplex::{Estimate, IntegrationRule, Point, PrecisionConfig, RuleKind, SimplexMeasure, SimplexPoint};

/// `sum_i p_i^x`, with `0^x = 0`.
pub fn phi<T: Real>(p: &SimplexPoint<T>, x: T) -> T {
    p.coords()
        .iter()
        .filter(|&&c| c > T::zero())
        .fold(T::zero(), |acc, &c| acc + c.powf(x))
}

/// `-log phi_p(x)`.
pub fn psi<T: Real>(p: &SimplexPoint<T>, x: T) -> T {
    -phi(p, x).ln()
}

/// Entropy functional `H(a) = sum_i a_i log(a_i / a_tot) / a_tot`.
///
/// Note the sign: this is the *negative* of the Shannon entropy of the
/// normalised weights, so `H <= 0`. See [`shannon_entropy`] for the usual sign.
pub fn entropy_h<T: Real>(a: &[T]) -> Result<T> {
    let total = a.iter().fold(T::zero(), |s, &x| s + x);
    if !(total > T::zero()) {
        return Err(Error::AllZero);
    }
    Ok(a.iter()
        .filter(|&&x| x > T::zero())
        .fold(T::zero(), |s, &x| s + x * (x / total).ln())
        / total)
}

/// Shannon entropy `-H(a)` of the normalised weights (nonnegative).
pub fn shannon_entropy<T: Real>(a: &[T]) -> Result<T> {
    entropy_h(a).map(|h| -h)
}

/// `I(p, p^t) = sum_i p_i^t log(1/p_i) / phi_p(t)`: the mean of `log(1/p_i)`
/// under the tilted law `p^t / phi_p(t)`.
pub fn info_i<T: Real>(p: &SimplexPoint<T>, t: T) -> Result<T> {
    if p.is_vertex() {
        return Err(Error::VertexPoint);
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for &c in p.coords().iter().filter(|&&c| c > T::zero()) {
        let w = c.powf(t);
        num += w * (-c.ln());
        den += w;
    }
    Ok(num / den)
}

/// `psi_mu` evaluator with a fixed integration rule, so that every evaluation
/// (in particular every step of the theta bisection) reuses the same nodes or
/// Monte-Carlo sample.
#[derive(Clone, Debug)]
pub struct PsiProfile {
    rule: IntegrationRule,
    /// `log p_i` of every positive coordinate of every node.
    logs: Vec<Vec<f64>>,
}

impl PsiProfile {
    pub fn new(mu: &SimplexMeasure, cfg: &PrecisionConfig) -> Result<Self> {
        let rule = IntegrationRule::new(mu, cfg)?;
        let logs = rule
            .points()
            .iter()
            .map(|p| p.coords().iter().filter(|&&c| c > 0.0).map(|c| c.ln()).collect())
            .collect();
        Ok(PsiProfile { rule, logs })
    }

    pub fn rule(&self) -> &IntegrationRule {
        &self.rule
    }

    pub fn psi(&self, x: f64) -> Estimate {
        self.rule.combine(self.logs.iter().map(|l| -l.iter().map(|&lp| (x * lp).exp()).sum::<f64>().ln()))
    }

    /// `E_mu log(1 / p_max)`.
    pub fn log_inv_pmax(&self) -> Estimate {
        self.rule.expect(|p| -p.p_max().0.ln())
    }

    pub fn solve_theta(&self, tol: f64) -> Result<f64> {
        let two_psi2 = 2.0 * self.psi(2.0).value;
        if !(two_psi2 > 0.0) {
            return Err(Error::DegenerateMeasure);
        }
        let g = |t: f64| self.psi(t).value - two_psi2;
        let (at_three, at_four) = (g(3.0), g(4.0));
        if at_three > tol || at_four < -tol {
            return Err(Error::NoBracket { at_three, at_four });
        }
        if at_three >= 0.0 {
            return Ok(3.0);
        }
        if at_four <= 0.0 {
            return Ok(4.0);
        }
        Ok(bisect_increasing(g, 3.0, 4.0, tol, THETA_MAX_ITER))
    }
}

pub const THETA_TOL: f64 = 1e-9;
const THETA_MAX_ITER: usize = 60;

/// `psi_mu(x) = E_mu psi_p(x)`.
pub fn psi_mu(mu: &SimplexMeasure, x: f64, cfg: &PrecisionConfig) -> Result<Estimate> {
    let est = PsiProfile::new(mu, cfg)?.psi(x);
    if !est.value.is_finite() {
        return Err(Error::DegenerateMeasure);
    }
    Ok(est)
}

/// Root of `psi_mu(theta) = 2 psi_mu(2)` in `[3, 4]`, to within `tol`.
pub fn solve_theta(mu: &SimplexMeasure, cfg: &PrecisionConfig, tol: f64) -> Result<f64> {
    if !mu.is_non_degenerate() {
        return Err(Error::DegenerateMeasure);
    }
    PsiProfile::new(mu, cfg)?.solve_theta(tol)
}

/// `(theta, psi(2), C, C~, C-bar)` for one measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    pub theta: f64,
    pub psi2: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    #[serde(rename = "C_bar")]
    pub c_bar: f64,
    /// Relative gap between `(3+theta)/(4 psi(2))` and `(3+theta)/(2 psi(theta))`.
    pub self_check: f64,
    /// Monte-Carlo standard error of `psi(2)` (zero for deterministic rules).
    pub psi2_std_error: f64,
    pub method_note: String,
}

pub const CSV_HEADER: &str = "measure,k,theta,psi2,C,C_tilde,C_bar";

impl ConstantsBundle {
    pub fn csv_row(&self, measure: &str, k: usize) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            csv_field(measure),
            k,
            self.theta,
            self.psi2,
            self.c,
            self.c_tilde,
            self.c_bar
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// All constants of `mu`. Degenerate measures (`mu(V_k) = 1`, where `C-bar`
/// is infinite) are reported as [`Error::DegenerateMeasure`].
pub fn constants_bundle(mu: &SimplexMeasure, cfg: &PrecisionConfig) -> Result<ConstantsBundle> {
    if !mu.is_non_degenerate() {
        return Err(Error::DegenerateMeasure);
    }
    let profile = PsiProfile::new(mu, cfg)?;
    let theta = profile.solve_theta(THETA_TOL)?;
    let psi2_est = profile.psi(2.0);
    let psi2 = psi2_est.value;
    let c = (3.0 + theta) / (4.0 * psi2);
    let alt = (3.0 + theta) / (2.0 * profile.psi(theta).value);
    let lmax = profile.log_inv_pmax().value;
    let c_tilde = if lmax > 0.0 { 1.0 / lmax } else { f64::INFINITY };
    let method_note = match profile.rule().kind() {
        RuleKind::Exact => "exact finite sum".to_string(),
        RuleKind::Quadrature { nodes } => format!("Gauss-Legendre quadrature, {nodes} nodes per half"),
        RuleKind::MonteCarlo { samples, seed } => format!("Monte Carlo, {samples} samples, seed {seed}"),
    };
    Ok(ConstantsBundle {
        theta,
        psi2,
        c,
        c_tilde,
        c_bar: c.max(c_tilde),
        self_check: ((c - alt) / c).abs(),
        psi2_std_error: psi2_est.std_error,
        method_note,
    })
}

/// The ten measures of the reference table, in order, with their labels.
/// The last row is the point mass at the centre of `D_2`.
pub fn table1_measures() -> Vec<(String, SimplexMeasure)> {
    let beta = |a: f64, b: f64| SimplexMeasure::Beta { a, b };
    let dir = |a: &[f64]| SimplexMeasure::Dirichlet { alphas: a.to_vec() };
    vec![
        ("Beta(1,1)".into(), beta(1.0, 1.0)),
        ("Beta(1/2,1/2)".into(), beta(0.5, 0.5)),
        ("Beta(2,2)".into(), beta(2.0, 2.0)),
        ("Beta(2,16)".into(), beta(2.0, 16.0)),
        ("Uniform[1/4,3/4]".into(), SimplexMeasure::UniformInterval { lo: 0.25, hi: 0.75 }),
        ("Dirichlet(1,1,1)".into(), dir(&[1.0, 1.0, 1.0])),
        ("Dirichlet(1/2,1/2,1/2)".into(), dir(&[0.5, 0.5, 0.5])),
        ("Dirichlet(2,2,2)".into(), dir(&[2.0, 2.0, 2.0])),
        ("Dirichlet(1,1,1,1)".into(), dir(&[1.0, 1.0, 1.0, 1.0])),
        ("Delta(1/2,1/2)".into(), SimplexMeasure::uniform_point(2)),
    ]
}

/// Convenience: `psi_p` on a plain `f64` point.
pub fn psi_point(p: &Point, x: f64) -> f64 {
    psi(p, x)
}
