//! Riffle shuffles driven by cut measures on the simplex: mixing constants,
//! shuffle sampling, exact laws and statistical diagnostics.

pub mod constants;
pub mod error;
pub mod psi_class;
pub mod rng;
mod roots;
pub mod scalar;
pub mod shuffle;
pub mod simplex;
pub mod stats;

pub use constants::{
    constants_bundle, entropy_h, info_i, phi, psi, psi_mu, shannon_entropy, solve_theta, table1_measures,
    ConstantsBundle,
};
pub use error::{Error, Result};
pub use rng::{replicate_rng, StreamKey, StreamRng};
pub use scalar::{Field, Real};
pub use shuffle::{CutProcess, PileSizes, Permutation, ShuffleGraph, ShuffleMatrix};
pub use simplex::{
    discretize_measure, expect_functional, sample_point, Discretization, Estimate, IntegrationRule,
    PrecisionConfig, SimplexMeasure, SimplexPoint,
};

/// Double-precision point of the simplex.
pub type Point = SimplexPoint<f64>;
/// Single-precision point of the simplex.
pub type PointF32 = SimplexPoint<f32>;

pub use psi_class::{
    average_f, discretize_f_to_simplex, make_piecewise_f, theta_and_cbar_of_f, verify_nonconvexity,
    PsiClassFunction, VirtualPoint,
};

/// Psi-class profile in double precision.
pub type PsiFunction = PsiClassFunction<f64>;
/// Psi-class profile in exact rational arithmetic.
pub type ExactPsiFunction = PsiClassFunction<num_rational::BigRational>;
