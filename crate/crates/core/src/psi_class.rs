//! The class `Psi` of concave profiles `f: [1, 4] -> R+` with `f(1) = 0`,
//! `f(2) > 0` and `f(x)/x` nondecreasing, represented as minima of affine
//! pieces `f(x) = min_j (a_j x - b_j)`.
//!
//! Every `psi_mu` is in `Psi`, and conversely every `f` in `Psi` is a limit of
//! rescaled `psi_p` (see [`discretize_f_to_simplex`]). The analogues
//!
//! ```text
//! f(theta_f) = 2 f(2),   C_f = (3 + theta_f) / (4 f(2)),   C~_f = 1 / f'(4-)
//! ```
//!
//! are computed exactly over any [`Field`], so the non-convexity example can
//! be checked in rational arithmetic.

use crate::error::{Error, Result};
use crate::scalar::Field;

/// `min_j (a_j x - b_j)` on `[1, 4]`.
///
/// Pieces are stored without redundancy: each one is active on an interval
/// of positive length, ordered from the steepest (active at 1) to the
/// shallowest (active at 4).
#[derive(Clone, Debug, PartialEq)]
pub struct PsiClassFunction<F: Field> {
    pieces: Vec<(F, F)>,
}

fn two<F: Field>() -> F {
    F::one() + F::one()
}

fn int<F: Field>(n: i64) -> F {
    F::from_ratio(n, 1)
}

fn fmax<F: Field>(a: F, b: F) -> F {
    if a >= b {
        a
    } else {
        b
    }
}

fn fmin<F: Field>(a: F, b: F) -> F {
    if a <= b {
        a
    } else {
        b
    }
}

/// Grid spacing of the `f(x)/x` monotonicity check.
const GRID_STEP: f64 = 1e-3;

impl<F: Field> PsiClassFunction<F> {
    /// Validates `pieces` as a member of `Psi`. Pieces never active on
    /// `[1, 4]` are dropped and equal slopes are merged.
    pub fn new(pieces: Vec<(F, F)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::NotInPsiClass("no pieces".into()));
        }
        for (a, b) in &pieces {
            if !a.to_f64().is_finite() || !b.to_f64().is_finite() {
                return Err(Error::NotInPsiClass("non-finite coefficient".into()));
            }
            if *a < F::zero() || *b < F::zero() {
                return Err(Error::NotInPsiClass(format!(
                    "coefficients must be nonnegative, got ({}, {})",
                    a.to_f64(),
                    b.to_f64()
                )));
            }
        }
        let f = PsiClassFunction { pieces: active_pieces(pieces) };
        let at_one = f.eval(&F::one());
        if at_one.to_f64().abs() > 1e-12 {
            return Err(Error::NotInPsiClass(format!("f(1) = {} != 0", at_one.to_f64())));
        }
        let at_two = f.eval(&two());
        if at_two <= F::zero() {
            return Err(Error::NotInPsiClass(format!("f(2) = {} is not positive", at_two.to_f64())));
        }
        let g = f.to_f64();
        let steps = (3.0 / GRID_STEP).round() as usize;
        let mut prev = 0.0;
        for i in 0..=steps {
            let x = 1.0 + i as f64 * GRID_STEP;
            let r = g.eval(&x) / x;
            if r < prev - 1e-12 {
                return Err(Error::NotInPsiClass(format!("f(x)/x decreases near x = {x:.3}")));
            }
            prev = r;
        }
        Ok(f)
    }

    /// Piecewise-linear interpolant of `points` (strictly increasing `x`,
    /// starting at `x = 1`), optionally continued past the last point with
    /// slope `tail_slope`.
    pub fn from_breakpoints(points: &[(F, F)], tail_slope: Option<F>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::NotInPsiClass("need at least two breakpoints".into()));
        }
        let mut pieces = Vec::with_capacity(points.len());
        for w in points.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if x1 <= x0 {
                return Err(Error::NotInPsiClass("breakpoints must increase".into()));
            }
            let a = (y1.clone() - y0.clone()) / (x1.clone() - x0.clone());
            let b = a.clone() * x0.clone() - y0.clone();
            pieces.push((a, b));
        }
        if let Some(s) = tail_slope {
            let (x, y) = points.last().unwrap();
            let b = s.clone() * x.clone() - y.clone();
            pieces.push((s, b));
        }
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[(F, F)] {
        &self.pieces
    }

    pub fn eval(&self, x: &F) -> F {
        let mut it = self.pieces.iter().map(|(a, b)| a.clone() * x.clone() - b.clone());
        let first = it.next().unwrap();
        it.fold(first, fmin)
    }

    /// Interior kinks, in increasing order.
    pub fn breakpoints(&self) -> Vec<F> {
        self.pieces.windows(2).map(|w| crossing(&w[0], &w[1])).collect()
    }

    /// Left derivative at 4. Among pieces tied at `x = 4` the steepest one is
    /// the minimum just to the left of 4.
    pub fn left_slope_at_4(&self) -> F {
        let four = int::<F>(4);
        let v = self.eval(&four);
        self.pieces
            .iter()
            .filter(|(a, b)| a.clone() * four.clone() - b.clone() == v)
            .map(|(a, _)| a.clone())
            .fold(F::zero(), fmax)
    }

    /// `x -> s f(x)` for `s > 0`.
    pub fn scale(&self, s: &F) -> Result<Self> {
        if *s <= F::zero() {
            return Err(Error::NotInPsiClass("scale must be positive".into()));
        }
        Self::new(self.pieces.iter().map(|(a, b)| (a.clone() * s.clone(), b.clone() * s.clone())).collect())
    }

    pub fn to_f64(&self) -> PsiClassFunction<f64> {
        PsiClassFunction { pieces: self.pieces.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect() }
    }
}

/// Validated constructor from affine pieces `(a_j, b_j)`.
pub fn make_piecewise_f<F: Field>(pieces: Vec<(F, F)>) -> Result<PsiClassFunction<F>> {
    PsiClassFunction::new(pieces)
}

fn crossing<F: Field>(p: &(F, F), q: &(F, F)) -> F {
    (p.1.clone() - q.1.clone()) / (p.0.clone() - q.0.clone())
}

/// Pieces of `min_j (a_j x - b_j)` active on a subinterval of `[1, 4]` with
/// positive length, steepest first.
fn active_pieces<F: Field>(mut pieces: Vec<(F, F)>) -> Vec<(F, F)> {
    // Equal slopes: only the lowest line matters.
    pieces.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap().then(q.1.partial_cmp(&p.1).unwrap()));
    pieces.dedup_by(|later, earlier| later.0 == earlier.0);
    let (one, four) = (F::one(), int::<F>(4));
    let keep: Vec<bool> = (0..pieces.len())
        .map(|j| {
            // Steeper pieces lie below piece j left of their crossing, shallower
            // ones right of it.
            let mut lo = one.clone();
            let mut hi = four.clone();
            for (i, q) in pieces.iter().enumerate() {
                if i == j {
                    continue;
                }
                let x = crossing(q, &pieces[j]);
                if q.0 > pieces[j].0 {
                    lo = fmax(lo, x);
                } else {
                    hi = fmin(hi, x);
                }
            }
            lo < hi
        })
        .collect();
    let mut it = keep.iter();
    pieces.retain(|_| *it.next().unwrap());
    pieces
}

/// `(theta_f, C_f, C~_f, C-bar_f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiConstants<F> {
    pub theta: F,
    pub c: F,
    pub c_tilde: F,
    pub c_bar: F,
}

impl<F: Field> PsiConstants<F> {
    pub fn to_f64(&self) -> PsiConstants<f64> {
        PsiConstants {
            theta: self.theta.to_f64(),
            c: self.c.to_f64(),
            c_tilde: self.c_tilde.to_f64(),
            c_bar: self.c_bar.to_f64(),
        }
    }
}

/// Exact constants of `f`. `f` is increasing, so `f(x) >= c` exactly when
/// `x >= (c + b_j) / a_j` for every piece, and `theta_f` is the largest of
/// these thresholds.
pub fn theta_and_cbar_of_f<F: Field>(f: &PsiClassFunction<F>) -> PsiConstants<F> {
    let f2 = f.eval(&two());
    let target = two::<F>() * f2.clone();
    let theta = f
        .pieces()
        .iter()
        .map(|(a, b)| (target.clone() + b.clone()) / a.clone())
        .fold(F::one(), fmax);
    let c = (int::<F>(3) + theta.clone()) / (int::<F>(4) * f2);
    let c_tilde = F::one() / f.left_slope_at_4();
    let c_bar = fmax(c.clone(), c_tilde.clone());
    PsiConstants { theta, c, c_tilde, c_bar }
}

/// Pointwise average `(f + g) / 2`, exact on the merged breakpoint set.
pub fn average_f<F: Field>(f: &PsiClassFunction<F>, g: &PsiClassFunction<F>) -> Result<PsiClassFunction<F>> {
    let mut xs = vec![F::one(), int(4)];
    xs.extend(f.breakpoints());
    xs.extend(g.breakpoints());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let pts: Vec<(F, F)> = xs
        .into_iter()
        .map(|x| {
            let y = (f.eval(&x) + g.eval(&x)) / two();
            (x, y)
        })
        .collect();
    PsiClassFunction::from_breakpoints(&pts, None)
}

/// The profile that grows with slope `6.5 - eta` up to `theta_f = 3.5 - eta`
/// and with slope 4 afterwards: breakpoints `(1, 0)`, `(2, 6.5 - eta)`,
/// `(3.5 - eta, 13 - 2 eta)`.
pub fn nonconvex_f<F: Field>(eta: &F) -> Result<PsiClassFunction<F>> {
    let pts = [
        (F::one(), F::zero()),
        (two(), F::from_ratio(13, 2) - eta.clone()),
        (F::from_ratio(7, 2) - eta.clone(), int::<F>(13) - two::<F>() * eta.clone()),
    ];
    PsiClassFunction::from_breakpoints(&pts, Some(int(4)))
}

/// Linear on `[1, 2]` and `[2, 4]` through `(1, 0)`, `(2, 6.5 + eta)` and
/// `(3.5 + eta, 13 + 2 eta)`.
pub fn nonconvex_f_breve<F: Field>(eta: &F) -> Result<PsiClassFunction<F>> {
    let pts = [
        (F::one(), F::zero()),
        (two(), F::from_ratio(13, 2) + eta.clone()),
        (F::from_ratio(7, 2) + eta.clone(), int::<F>(13) + two::<F>() * eta.clone()),
    ];
    PsiClassFunction::from_breakpoints(&pts, None)
}

/// Outcome of the non-convexity construction at one `eta`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NonConvexityReport {
    pub eta: f64,
    pub c_bar_f: f64,
    pub c_bar_f_breve: f64,
    pub c_bar_f_hat: f64,
    pub theta_f_hat: f64,
    pub f_hat_at_3_5: f64,
    /// `C-bar` of the average minus the larger of the two endpoint values.
    pub gap: f64,
    /// Whether the gap is strictly positive (decided in the working field).
    pub strict_gap: bool,
}

/// Builds `f`, `f-breve` and their average and reports their constants.
pub fn nonconvexity_report<F: Field>(eta: &F) -> Result<NonConvexityReport> {
    let f = nonconvex_f(eta)?;
    let fb = nonconvex_f_breve(eta)?;
    let fh = average_f(&f, &fb)?;
    let (cf, cb, ch) = (theta_and_cbar_of_f(&f), theta_and_cbar_of_f(&fb), theta_and_cbar_of_f(&fh));
    let worst = fmax(cf.c_bar.clone(), cb.c_bar.clone());
    let gap = ch.c_bar.clone() - worst;
    Ok(NonConvexityReport {
        eta: eta.to_f64(),
        c_bar_f: cf.c_bar.to_f64(),
        c_bar_f_breve: cb.c_bar.to_f64(),
        c_bar_f_hat: ch.c_bar.to_f64(),
        theta_f_hat: ch.theta.to_f64(),
        f_hat_at_3_5: fh.eval(&F::from_ratio(7, 2)).to_f64(),
        gap: gap.to_f64(),
        strict_gap: gap > F::zero(),
    })
}

/// Checks `C-bar_f = C-bar_f-breve = 1/4` (within `tol`), `C-bar` of the
/// average `> 1/4 + tol`, and `theta` of the average `> 3.5`.
pub fn verify_nonconvexity<F: Field>(eta: &F, tol: &F) -> Result<NonConvexityReport> {
    if *eta < F::zero() || *eta > F::from_ratio(1, 20) {
        return Err(Error::CounterexampleFailed(format!("eta = {} outside [0, 0.05]", eta.to_f64())));
    }
    let f = nonconvex_f(eta)?;
    let fb = nonconvex_f_breve(eta)?;
    let fh = average_f(&f, &fb)?;
    let quarter = F::from_ratio(1, 4);
    let (cf, cb, ch) = (theta_and_cbar_of_f(&f), theta_and_cbar_of_f(&fb), theta_and_cbar_of_f(&fh));
    let fail = |what: String| Err(Error::CounterexampleFailed(what));
    if (cf.c_bar.clone() - quarter.clone()).abs() > *tol {
        return fail(format!("C-bar of f is {}, not 1/4", cf.c_bar.to_f64()));
    }
    if (cb.c_bar.clone() - quarter.clone()).abs() > *tol {
        return fail(format!("C-bar of f-breve is {}, not 1/4", cb.c_bar.to_f64()));
    }
    if ch.c_bar.clone() <= quarter + tol.clone() {
        return fail(format!("no strict gap: C-bar of the average is {}", ch.c_bar.to_f64()));
    }
    if ch.theta <= F::from_ratio(7, 2) {
        return fail(format!("theta of the average is {} <= 3.5", ch.theta.to_f64()));
    }
    nonconvexity_report(eta)
}

/// A point of a (huge) simplex stored as groups of equal coordinates.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CoordinateGroup {
    /// `log` of the common coordinate value.
    pub log_value: f64,
    /// `log` of the number of coordinates.
    pub log_multiplicity: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VirtualPoint {
    pub log_k: f64,
    /// One group per affine piece, then the filler group.
    pub groups: Vec<CoordinateGroup>,
}

impl VirtualPoint {
    /// `log phi_p(x) = log sum_groups m v^x`, by log-sum-exp.
    pub fn log_phi(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self.groups.iter().map(|g| g.log_multiplicity + x * g.log_value).collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    }

    pub fn psi(&self, x: f64) -> f64 {
        -self.log_phi(x)
    }

    pub fn psi_over_log_k(&self, x: f64) -> f64 {
        self.psi(x) / self.log_k
    }

    pub fn total_mass(&self) -> f64 {
        self.log_phi(1.0).exp()
    }

    pub fn log_num_coordinates(&self) -> f64 {
        let m = self.groups.iter().map(|g| g.log_multiplicity).fold(f64::NEG_INFINITY, f64::max);
        m + self.groups.iter().map(|g| (g.log_multiplicity - m).exp()).sum::<f64>().ln()
    }
}

/// `log ceil(e^t)` without overflow.
fn log_ceil_exp(t: f64) -> f64 {
    if t > 40.0 {
        t
    } else {
        t.exp().ceil().ln()
    }
}

/// Realises `f` as a point whose `psi / log K` is close to `f` on `[2, 4]`:
/// `ceil(K^{b_j})` coordinates equal to `K^{-a_j}` per piece, and the rest of
/// the mass spread over `K^{10 max_j(|a_j| + |b_j|)}` equal filler coordinates.
///
/// Pieces with `a_j - b_j < delta` (passing within `delta` of `(1, 0)`) are
/// lifted to `b_j = a_j - delta` first, so the approximation is to `f` lifted
/// by at most `delta`; the remaining error is at most `log(J + 1) / log K`.
pub fn discretize_f_to_simplex<F: Field>(f: &PsiClassFunction<F>, k_scale: f64, delta: f64) -> Result<VirtualPoint> {
    if !(k_scale > 1.0) || !(delta > 0.0) {
        return Err(Error::ScaleTooSmall { mass: f64::INFINITY });
    }
    let log_k = k_scale.ln();
    let pieces: Vec<(f64, f64)> = f
        .pieces()
        .iter()
        .map(|(a, b)| {
            let (a, b) = (a.to_f64(), b.to_f64());
            (a, if a - b < delta { a - delta } else { b })
        })
        .collect();
    let mass_bound: f64 = pieces.iter().map(|(a, b)| 2.0 * ((b - a) * log_k).exp()).sum();
    if mass_bound >= 1.0 {
        return Err(Error::ScaleTooSmall { mass: mass_bound });
    }
    let mut groups: Vec<CoordinateGroup> = pieces
        .iter()
        .map(|&(a, b)| CoordinateGroup { log_value: -a * log_k, log_multiplicity: log_ceil_exp(b * log_k) })
        .collect();
    let used: f64 = groups.iter().map(|g| (g.log_multiplicity + g.log_value).exp()).sum();
    let log_filler = 10.0 * pieces.iter().map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max) * log_k;
    groups.push(CoordinateGroup { log_value: (1.0 - used).ln() - log_filler, log_multiplicity: log_filler });
    Ok(VirtualPoint { log_k, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn linear_profile() {
        let f = make_piecewise_f(vec![(1.0, 1.0)]).unwrap();
        assert_eq!(f.eval(&2.0), 1.0);
        let c = theta_and_cbar_of_f(&f);
        assert_eq!(c.theta, 3.0);
        assert_eq!(c.c, 1.5);
        assert_eq!(c.c_tilde, 1.0);
        assert_eq!(c.c_bar, 1.5);
    }

    #[test]
    fn rejects_nonzero_at_one() {
        assert!(matches!(make_piecewise_f(vec![(1.0, 2.0)]), Err(Error::NotInPsiClass(_))));
        assert!(matches!(make_piecewise_f(vec![(1.0, -1.0)]), Err(Error::NotInPsiClass(_))));
        assert!(matches!(make_piecewise_f::<f64>(vec![]), Err(Error::NotInPsiClass(_))));
        // f = 0 on [1, 4]: f(2) is not positive.
        assert!(matches!(make_piecewise_f(vec![(0.0, 0.0), (1.0, 1.0)]), Err(Error::NotInPsiClass(_))));
    }

    #[test]
    fn redundant_pieces_are_dropped() {
        // x - 1 lies below 2x - 1 and 0.9x - 0.5 on [1, 4], and below x - 0.5.
        let f = make_piecewise_f(vec![(2.0, 1.0), (1.0, 1.0), (0.9, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(f.pieces(), &[(1.0, 1.0)]);
    }

    #[test]
    fn nonconvex_f_shape() {
        let eta = q(1, 100);
        let f = nonconvex_f(&eta).unwrap();
        assert_eq!(f.pieces().len(), 3);
        assert_eq!(f.eval(&q(2, 1)), q(649, 100));
        assert_eq!(f.eval(&q(349, 100)), q(1298, 100));
        // Slope 4 past 3.5 - eta gives f(3.5) = 13 + 2 eta.
        assert_eq!(f.eval(&q(7, 2)), q(1302, 100));
        assert_eq!(f.left_slope_at_4(), q(4, 1));
        let c = theta_and_cbar_of_f(&f);
        assert_eq!(c.theta, q(349, 100));
        assert_eq!(c.c, q(1, 4));
        assert_eq!(c.c_tilde, q(1, 4));
        assert_eq!(c.c_bar, q(1, 4));
    }

    #[test]
    fn nonconvex_f_breve_shape() {
        let eta = q(1, 100);
        let fb = nonconvex_f_breve(&eta).unwrap();
        assert_eq!(fb.eval(&q(1, 1)), q(0, 1));
        let c = theta_and_cbar_of_f(&fb);
        assert_eq!(c.theta, q(351, 100));
        assert_eq!(c.c, q(1, 4));
        // f'(4) = (6.5 + eta) / (1.5 + eta) > 4.
        assert_eq!(fb.left_slope_at_4(), q(651, 151));
        assert!(c.c_tilde < q(1, 4));
        assert_eq!(c.c_bar, q(1, 4));
    }

    #[test]
    fn average_matches_pointwise_mean() {
        let eta = q(1, 100);
        let f = nonconvex_f(&eta).unwrap();
        let fb = nonconvex_f_breve(&eta).unwrap();
        let fh = average_f(&f, &fb).unwrap();
        assert_eq!(fh.eval(&q(2, 1)), q(13, 2));
        for i in 0..=300 {
            let x = q(100 + i, 100);
            assert_eq!(fh.eval(&x), (f.eval(&x) + fb.eval(&x)) / q(2, 1));
        }
        assert_eq!(average_f(&f, &f).unwrap(), f);
    }

    #[test]
    fn f_hat_at_three_and_a_half() {
        // Exact rational evaluation gives f-hat(3.5) - (13 - eta/6) = c eta^2
        // with c in [1.08, 1.11] for these eta.
        for d in [200, 100, 50, 25] {
            let eta = q(1, d);
            let fh = average_f(&nonconvex_f(&eta).unwrap(), &nonconvex_f_breve(&eta).unwrap()).unwrap();
            let err = fh.eval(&q(7, 2)) - (q(13, 1) - eta.clone() / q(6, 1));
            let ratio = (err / (eta.clone() * eta.clone())).to_f64();
            assert!(ratio > 1.0 && ratio < 1.2, "eta=1/{d}: {ratio}");
            assert!(fh.eval(&q(7, 2)) < q(13, 1));
        }
    }

    #[test]
    fn nonconvexity_holds() {
        for eta in [q(1, 100), q(1, 25)] {
            let r = verify_nonconvexity(&eta, &q(1, 1_000_000_000)).unwrap();
            assert!(r.strict_gap);
            assert!(r.gap > 0.0);
            assert!(r.theta_f_hat > 3.5);
            assert_eq!(r.c_bar_f, 0.25);
        }
        let r = verify_nonconvexity(&0.01f64, &1e-9).unwrap();
        assert!(r.c_bar_f_hat > 0.25);
    }

    #[test]
    fn no_gap_at_eta_zero() {
        let r = nonconvexity_report(&q(0, 1)).unwrap();
        assert!(!r.strict_gap);
        assert_eq!(r.f_hat_at_3_5, 13.0);
        assert!(matches!(verify_nonconvexity(&q(0, 1), &q(0, 1)), Err(Error::CounterexampleFailed(_))));
        assert!(verify_nonconvexity(&0.2f64, &1e-9).is_err());
    }

    #[test]
    fn scaling_is_covariant() {
        let f = nonconvex_f(&0.02f64).unwrap();
        let c = theta_and_cbar_of_f(&f);
        for s in [0.5, 3.0, 17.0] {
            let cs = theta_and_cbar_of_f(&f.scale(&s).unwrap());
            assert!((cs.theta - c.theta).abs() < 1e-12);
            assert!((cs.c * s - c.c).abs() < 1e-12);
            assert!((cs.c_tilde * s - c.c_tilde).abs() < 1e-12);
        }
    }

    #[test]
    fn left_derivative_at_tie_takes_steeper_piece() {
        // Both pieces pass through (4, 3): x - 1 and (x + 5)/3. Left of 4 the
        // minimum is x - 1, which has slope 1.
        let f = make_piecewise_f(vec![(1.0, 1.0), (1.0 / 3.0, -5.0 / 3.0)]);
        assert!(f.is_err()); // negative b
        let f = PsiClassFunction { pieces: vec![(1.0, 1.0), (0.5, -1.0)] };
        assert_eq!(f.left_slope_at_4(), 1.0);
    }

    #[test]
    fn discretized_linear_profile() {
        let f = make_piecewise_f(vec![(1.0, 1.0)]).unwrap();
        let k = 10f64.exp();
        let delta = 0.1;
        let p = discretize_f_to_simplex(&f, k, delta).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
        assert!(p.psi_over_log_k(1.0).abs() < 1e-12);
        for i in 0..=8 {
            let x = 2.0 + 0.25 * i as f64;
            let err = (f.eval(&x) - p.psi_over_log_k(x)).abs();
            assert!(err <= delta + 0.01, "x={x}: {err}");
        }
        // delta below log 2 / log K cannot satisfy the mass condition.
        assert!(matches!(discretize_f_to_simplex(&f, k, 0.05), Err(Error::ScaleTooSmall { .. })));
    }

    #[test]
    fn discretized_nonconvex_profile() {
        let f = nonconvex_f(&0.01f64).unwrap();
        let p = discretize_f_to_simplex(&f, 40f64.exp(), 0.1).unwrap();
        assert!(p.psi_over_log_k(1.0).abs() < 1e-12);
        let worst = (0..=4)
            .map(|i| 2.0 + 0.5 * i as f64)
            .map(|x| (f.eval(&x) - p.psi_over_log_k(x)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 0.1, "{worst}");
        assert!(worst <= 4f64.ln() / 40.0 + 1e-12);
        assert!(p.log_num_coordinates() > 40.0);
    }
}
