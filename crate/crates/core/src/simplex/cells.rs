//! Finite decomposition of the simplex: `k` vertex caps of L-infinity radius
//! `chi` plus a regular grid of small cells covering the rest.
//!
//! The L-infinity distance from `p` to the vertex `v_i` is `1 - p_i`, so the
//! cap around `v_i` is `{p : p_i > 1 - chi}`; caps are disjoint iff
//! `chi <= 1/2`. The remainder is cut by the grid of step `chi^2 / k` in the
//! first `k - 1` coordinates, which bounds every cell's L-infinity diameter by
//! `(k - 1) chi^2 / k < chi^2`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::measure::{IntegrationRule, Point, PrecisionConfig, RuleKind, SimplexMeasure};
use super::point::SimplexPoint;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellKey {
    /// Neighbourhood of the vertex with this index.
    Cap(usize),
    /// Grid cell, by integer coordinates of the first `k - 1` axes.
    Grid(Vec<u32>),
}

impl CellKey {
    pub fn is_cap(&self) -> bool {
        matches!(self, CellKey::Cap(_))
    }
}

/// Cell geometry for a given `k` and `chi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    pub k: usize,
    pub chi: f64,
    pub step: f64,
}

impl CellGrid {
    pub fn new(k: usize, chi: f64) -> Result<Self> {
        if !(chi > 0.0 && chi <= 0.5) || k < 1 {
            return Err(Error::InvalidChi(chi));
        }
        Ok(CellGrid { k, chi, step: chi * chi / k as f64 })
    }

    pub fn cell_of(&self, p: &Point) -> CellKey {
        let c = p.coords();
        if let Some(i) = c.iter().position(|&x| x > 1.0 - self.chi) {
            return CellKey::Cap(i);
        }
        let last = (1.0 / self.step).floor() as u32;
        CellKey::Grid(
            c[..self.k.saturating_sub(1)]
                .iter()
                .map(|&x| ((x / self.step).floor() as u32).min(last))
                .collect(),
        )
    }
}

/// A finite mixture `sum_i h_i delta_{p^(i)}` together with the cell each atom
/// represents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub grid: CellGrid,
    pub cells: Vec<CellKey>,
    pub weights: Vec<f64>,
    pub atoms: Vec<Point>,
}

impl Discretization {
    pub fn as_measure(&self) -> SimplexMeasure {
        SimplexMeasure::FiniteMixture { weights: self.weights.clone(), atoms: self.atoms.clone() }
    }

    /// Index of the cell containing `p`, if that cell carries mass.
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        let key = self.grid.cell_of(p);
        self.cells.iter().position(|c| *c == key)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Discretizes `mu` on the cell decomposition of radius `chi`.
///
/// Weights are exact for finite measures and Monte-Carlo cell counts otherwise
/// (using `cfg.mc_samples` draws). Each atom is the `mu`-weighted mean of the
/// support points falling in its cell, which lies in the (convex) cell.
pub fn discretize_measure(mu: &SimplexMeasure, chi: f64, cfg: &PrecisionConfig) -> Result<Discretization> {
    let grid = CellGrid::new(mu.k(), chi)?;
    let rule = match mu {
        SimplexMeasure::PointMass { .. }
        | SimplexMeasure::FiniteMixture { .. }
        | SimplexMeasure::Empirical { .. } => IntegrationRule::new(mu, cfg)?,
        // Cell masses of continuous measures are counted from draws.
        _ => sampled_rule(mu, cfg)?,
    };
    let mut acc: BTreeMap<CellKey, (f64, Vec<f64>)> = BTreeMap::new();
    for (p, &w) in rule.points().iter().zip(rule.weights()) {
        if w <= 0.0 {
            continue;
        }
        let e = acc.entry(grid.cell_of(p)).or_insert_with(|| (0.0, vec![0.0; grid.k]));
        e.0 += w;
        for (s, &c) in e.1.iter_mut().zip(p.coords()) {
            *s += w * c;
        }
    }
    let total: f64 = acc.values().map(|(w, _)| w).sum();
    let mut cells = Vec::with_capacity(acc.len());
    let mut weights = Vec::with_capacity(acc.len());
    let mut atoms = Vec::with_capacity(acc.len());
    for (key, (w, sums)) in acc {
        let mean: Vec<f64> = sums.iter().map(|s| s / w).collect();
        cells.push(key);
        weights.push(w / total);
        atoms.push(SimplexPoint::normalized(mean)?);
    }
    Ok(Discretization { grid, cells, weights, atoms })
}

fn sampled_rule(mu: &SimplexMeasure, cfg: &PrecisionConfig) -> Result<IntegrationRule> {
    let draws = SimplexMeasure::Empirical {
        samples: {
            let mut rng = crate::rng::StreamKey::new(cfg.seed).named("discretize").rng();
            (0..cfg.mc_samples).map(|_| mu.sample(&mut rng)).collect()
        },
    };
    let rule = IntegrationRule::new(&draws, cfg)?;
    debug_assert_eq!(rule.kind(), RuleKind::Exact);
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrecisionConfig {
        PrecisionConfig { quadrature_nodes: 64, mc_samples: 100_000, seed: 5 }
    }

    #[test]
    fn point_mass_gives_single_atom() {
        let mu = SimplexMeasure::point(vec![0.3, 0.7]).unwrap();
        let d = discretize_measure(&mu, 0.1, &cfg()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.weights, vec![1.0]);
        assert!(d.atoms[0].dist_inf(&SimplexPoint::new(vec![0.3, 0.7]).unwrap()) < 1e-15);
    }

    #[test]
    fn mixture_atoms_in_one_cell_merge() {
        let a = SimplexPoint::new(vec![0.501, 0.499]).unwrap();
        let b = SimplexPoint::new(vec![0.503, 0.497]).unwrap();
        let c = SimplexPoint::new(vec![0.2, 0.8]).unwrap();
        let mu = SimplexMeasure::mixture(vec![0.25, 0.25, 0.5], vec![a, b, c]).unwrap();
        let d = discretize_measure(&mu, 0.1, &cfg()).unwrap();
        assert_eq!(d.len(), 2);
        let mut w = d.weights.clone();
        w.sort_by(f64::total_cmp);
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn uniform_caps_have_mass_chi() {
        let mu = SimplexMeasure::beta(1.0, 1.0).unwrap();
        let d = discretize_measure(&mu, 0.1, &cfg()).unwrap();
        for i in 0..2 {
            let idx = d.cells.iter().position(|c| *c == CellKey::Cap(i)).unwrap();
            assert!((d.weights[idx] - 0.1).abs() < 0.01, "cap {i}: {}", d.weights[idx]);
        }
        assert!((d.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn atoms_lie_in_their_cells_and_count_is_bounded() {
        let chi = 0.2;
        let mu = SimplexMeasure::dirichlet(vec![1.0, 1.0, 1.0]).unwrap();
        let d = discretize_measure(&mu, chi, &cfg()).unwrap();
        assert!((d.len() as f64) <= (3.0 / (chi * chi)).powi(2) + 3.0);
        for (key, atom) in d.cells.iter().zip(&d.atoms) {
            assert_eq!(&d.grid.cell_of(atom), key);
        }
    }

    #[test]
    fn overlapping_caps_rejected() {
        let mu = SimplexMeasure::beta(1.0, 1.0).unwrap();
        assert_eq!(discretize_measure(&mu, 0.6, &cfg()), Err(Error::InvalidChi(0.6)));
        assert!(discretize_measure(&mu, 0.0, &cfg()).is_err());
    }
}
