//! Prefix masses and expected locations.
//!
//! For a digit string `x` of length `M`, `lambda_x = prod_t n^{(t)}_{x[t]} / N`
//! is the expected fraction of rows with prefix `x`, and
//! `J_x = [t_x, t_x + lambda_x)` is where those rows are expected to sit in
//! the sorted order, `t_x` being the expected fraction of rows below `x`.

use crate::simplex::Discretization;

use super::piles::PileSizes;

/// `prod_t n^{(t)}_{x[t]} / N`.
///
/// # Panics
/// If `x` is longer than `piles`.
pub fn lambda_of_prefix(piles: &[PileSizes], x: &[u8]) -> f64 {
    x.iter()
        .zip(piles)
        .map(|(&d, p)| p.sizes().get(d as usize).copied().unwrap_or(0) as f64 / p.n() as f64)
        .product::<f64>()
        * if x.len() <= piles.len() { 1.0 } else { panic!("prefix longer than the pile sequence") }
}

/// `(t_x, t_x + lambda_x)`, with
/// `t_x = sum_{j <= |x|} sum_{l < x[j]} lambda_{x[..j-1] l}`.
pub fn prefix_interval(piles: &[PileSizes], x: &[u8]) -> (f64, f64) {
    assert!(x.len() <= piles.len(), "prefix longer than the pile sequence");
    let mut lambda = 1.0;
    let mut t = 0.0;
    for (&d, p) in x.iter().zip(piles) {
        let n = p.n() as f64;
        let below: u64 = p.sizes().iter().take(d as usize).sum();
        t += lambda * below as f64 / n;
        lambda *= p.sizes().get(d as usize).copied().unwrap_or(0) as f64 / n;
    }
    (t, t + lambda)
}

/// At least two piles hold `>= chi N` cards.
///
/// This is the criterion "first and last piles with `>= chi N` cards
/// differ". For two piles it coincides with `L-inf` distance `>= chi` from
/// every vertex; for `k >= 3` it is stricter (e.g. `(0.9, 0.05, 0.05)` with
/// `chi = 0.08` is far from the vertices but has a single big pile).
pub fn is_chi_good(piles: &PileSizes, chi: f64) -> bool {
    let threshold = chi * piles.n() as f64;
    piles.sizes().iter().filter(|&&s| s as f64 >= threshold).count() >= 2
}

/// Finite-`N` check of the almost-`mu`-like condition: returns the first
/// offset `t_*` in `[0, rho log N)` such that in every full window
/// `(t_* + (i-1) w, t_* + i w]` of length `w = rho log N` inside `[1, K]`,
/// the fraction of steps whose normalised cut lies in each cell differs from
/// the cell's mass by less than `varphi`.
pub fn is_almost_mu_like(piles: &[PileSizes], disc: &Discretization, rho: f64, varphi: f64) -> Option<usize> {
    let n = piles.first()?.n();
    let w = rho * (n as f64).ln();
    if !(w > 0.0) || piles.iter().any(|p| p.k() != disc.grid.k || p.n() != n) {
        return None;
    }
    let ncell = disc.len();
    // Cell index of every step, `ncell` for cells without mass.
    let cells: Vec<usize> = piles
        .iter()
        .map(|p| p.fractions().ok().and_then(|q| disc.index_of(&q)).unwrap_or(ncell))
        .collect();
    let k = piles.len() as f64;
    let mut t_star = 0usize;
    while (t_star as f64) < w {
        let mut ok = true;
        let mut i = 1usize;
        while ok && t_star as f64 + i as f64 * w <= k {
            let lo = t_star as f64 + (i - 1) as f64 * w;
            let hi = t_star as f64 + i as f64 * w;
            let mut counts = vec![0usize; ncell + 1];
            // Integer steps t (1-based) with lo < t <= hi.
            let first = lo.floor() as usize + 1;
            let last = hi.floor() as usize;
            for t in first..=last {
                counts[cells[t - 1]] += 1;
            }
            ok = (0..=ncell).all(|c| {
                let mass = if c < ncell { disc.weights[c] } else { 0.0 };
                (counts[c] as f64 / w - mass).abs() < varphi
            });
            i += 1;
        }
        if ok {
            return Some(t_star);
        }
        t_star += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{discretize_measure, PrecisionConfig, SimplexMeasure, SimplexPoint};

    fn seq(s: &[&[u64]]) -> Vec<PileSizes> {
        s.iter().map(|p| PileSizes::new(p.to_vec()).unwrap()).collect()
    }

    #[test]
    fn lambda_examples() {
        let p = seq(&[&[3, 2], &[2, 3]]);
        assert_eq!(lambda_of_prefix(&p, &[]), 1.0);
        assert!((lambda_of_prefix(&p, &[0]) - 0.6).abs() < 1e-15);
        assert!((lambda_of_prefix(&p, &[0, 1]) - 0.36).abs() < 1e-15);
    }

    #[test]
    fn interval_examples() {
        let p = seq(&[&[3, 2], &[2, 3]]);
        let (a, b) = prefix_interval(&p, &[0]);
        assert_eq!(a, 0.0);
        assert!((b - 0.6).abs() < 1e-15);
        let (a, b) = prefix_interval(&p, &[1]);
        assert!((a - 0.6).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let (a, b) = prefix_interval(&p, &[1, 0]);
        assert!((a - 0.6).abs() < 1e-15);
        assert!((b - 0.76).abs() < 1e-15);
    }

    #[test]
    fn prefix_masses_partition_the_unit_interval() {
        let p = seq(&[&[3, 2], &[1, 1, 3], &[4, 1]]);
        let mut total = 0.0;
        let mut edge = 0.0;
        for a in 0..2u8 {
            for b in 0..3u8 {
                for c in 0..2u8 {
                    let x = [a, b, c];
                    let (lo, hi) = prefix_interval(&p, &x);
                    assert!((lo - edge).abs() < 1e-12);
                    edge = hi;
                    total += lambda_of_prefix(&p, &x);
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_good_examples() {
        let p = |s: &[u64]| PileSizes::new(s.to_vec()).unwrap();
        assert!(is_chi_good(&p(&[26, 26]), 0.1));
        assert!(!is_chi_good(&p(&[52, 0]), 0.01));
        assert!(!is_chi_good(&p(&[50, 2]), 0.05));
    }

    #[test]
    fn almost_mu_like_examples() {
        let cfg = PrecisionConfig::default();
        let n = 600u64;
        // Constant cut, point mass at its cell.
        let mu = SimplexMeasure::point(vec![0.5, 0.5]).unwrap();
        let disc = discretize_measure(&mu, 0.1, &cfg).unwrap();
        let constant = vec![PileSizes::new(vec![300, 300]).unwrap(); 60];
        assert_eq!(is_almost_mu_like(&constant, &disc, 1.0, 0.2), Some(0));
        // Alternating thirds and halves against the matching two-atom mixture.
        let atoms = vec![SimplexPoint::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap(), SimplexPoint::new(vec![0.5, 0.5]).unwrap()];
        let mix = SimplexMeasure::mixture(vec![0.5, 0.5], atoms).unwrap();
        let disc = discretize_measure(&mix, 0.1, &cfg).unwrap();
        let alternating: Vec<PileSizes> =
            (0..60).map(|t| PileSizes::new(if t % 2 == 0 { vec![n / 3, 2 * n / 3] } else { vec![n / 2, n / 2] }).unwrap()).collect();
        assert!(is_almost_mu_like(&alternating, &disc, 2.0, 0.15).is_some());
        // Vertex cuts never match a measure without vertex mass.
        let vertex = vec![PileSizes::new(vec![600, 0]).unwrap(); 60];
        assert_eq!(is_almost_mu_like(&vertex, &disc, 2.0, 0.15), None);
    }
}
