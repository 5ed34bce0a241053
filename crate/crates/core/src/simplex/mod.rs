//! Points of the probability simplex and measures on it.

mod cells;
mod measure;
mod point;
pub mod quadrature;

pub use cells::{discretize_measure, CellGrid, CellKey, Discretization};
pub use measure::{
    expect_functional, sample_point, Estimate, IntegrationRule, Point, PrecisionConfig, RuleKind,
    SimplexMeasure,
};
pub use point::{p_max, SimplexPoint};
