use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A probability vector `p = (p_0, ..., p_{k-1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint<T: Real> {
    coords: Vec<T>,
}

fn sum_tolerance<T: Real>(k: usize) -> T {
    let floor = T::of(1e-12);
    let scaled = T::epsilon() * T::of(8.0 * k as f64);
    if scaled > floor {
        scaled
    } else {
        floor
    }
}

impl<T: Real> SimplexPoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("no coordinates".into()));
        }
        let tol = sum_tolerance::<T>(coords.len());
        let mut sum = T::zero();
        for &c in &coords {
            if !(c >= T::zero() && c <= T::one() + tol) {
                return Err(Error::InvalidPoint(format!("coordinate {c} outside [0, 1]")));
            }
            sum += c;
        }
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidPoint(format!("coordinates sum to {sum}")));
        }
        Ok(SimplexPoint { coords })
    }

    /// Rescales nonnegative weights onto the simplex.
    pub fn normalized(weights: Vec<T>) -> Result<Self> {
        let sum = weights.iter().fold(T::zero(), |a, &b| a + b);
        if !(sum > T::zero()) || weights.iter().any(|w| *w < T::zero() || !w.is_finite()) {
            return Err(Error::InvalidPoint("weights must be nonnegative with positive sum".into()));
        }
        Ok(SimplexPoint { coords: weights.into_iter().map(|w| w / sum).collect() })
    }

    pub fn uniform(k: usize) -> Self {
        let v = T::one() / T::of(k as f64);
        SimplexPoint { coords: vec![v; k] }
    }

    pub fn vertex(k: usize, i: usize) -> Self {
        let mut coords = vec![T::zero(); k];
        coords[i] = T::one();
        SimplexPoint { coords }
    }

    /// Two-coordinate point `(q, 1 - q)`.
    pub fn binary(q: T) -> Result<Self> {
        Self::new(vec![q, T::one() - q])
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn is_vertex(&self) -> bool {
        self.coords.iter().any(|&c| c == T::one())
    }

    /// Largest coordinate and its index; ties go to the lowest index.
    pub fn p_max(&self) -> (T, usize) {
        let mut best = (self.coords[0], 0);
        for (i, &c) in self.coords.iter().enumerate().skip(1) {
            if c > best.0 {
                best = (c, i);
            }
        }
        best
    }

    /// L-infinity distance to another point of the same dimension.
    pub fn dist_inf(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// Largest coordinate of `p` with lowest-index tie breaking.
pub fn p_max<T: Real>(p: &SimplexPoint<T>) -> (T, usize) {
    p.p_max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_max_examples() {
        let p = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(p_max(&p), (0.5, 0));
        let p = SimplexPoint::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(p_max(&p), (0.5, 1));
        let p = SimplexPoint::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(p_max(&p), (1.0, 0));
        assert!(p.is_vertex());
    }

    #[test]
    fn rejects_invalid() {
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexPoint::<f64>::new(vec![]).is_err());
        assert!(SimplexPoint::new(vec![1.0 / 3.0, 2.0 / 3.0]).is_ok());
    }

    #[test]
    fn f32_points() {
        let p = SimplexPoint::<f32>::new(vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(p.p_max().1, 2);
    }

    #[test]
    fn l_inf_distance_to_vertex_is_one_minus_coordinate() {
        let p = SimplexPoint::<f64>::new(vec![0.7, 0.2, 0.1]).unwrap();
        for i in 0..3 {
            let d = p.dist_inf(&SimplexPoint::vertex(3, i));
            assert!((d - (1.0 - p.coords()[i])).abs() < 1e-15);
        }
    }
}
