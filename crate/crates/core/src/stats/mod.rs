//! Distances to uniformity and the statistics used to bound them.

pub mod coldspot;
pub mod exact;
pub mod graphs;
pub mod hypergeometric;
pub mod perm_stats;
pub mod tv;

use serde::{Deserialize, Serialize};

pub use coldspot::{
    ascent_statistic, build_cold_spots, cold_spot_test, cold_spot_trials, CellQuota, ColdSpotConfig, ColdSpotSet,
    ColdSpotSummary, ColdSpotTrials,
};
pub use exact::{
    exact_inverse_construction_law, exact_process_distribution, exact_process_laws, exact_shuffle_distribution,
    exact_tv, ExactDistribution, RationalDistribution,
};
pub use graphs::{first_moment_scan, is_l_sparse, shared_edges, FirstMomentRow};
pub use hypergeometric::{
    concentration_report, hypergeometric_pmf, hypergeometric_sample, multivariate_hypergeometric,
    ConcentrationReport, Hypergeometric,
};
pub use perm_stats::{ascents, descents, longest_increasing_run, rising_sequences};
pub use tv::{cutoff_scan, scan_csv, steps_for, tv_lower_bound_mc, Direction, ScanRow, Statistic, TvConfig, TvLowerBound};

/// Outcome of a threshold test: uniformity is rejected iff
/// `statistic > threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
    /// Per-replicate values, when the report summarises several draws.
    pub replicates: Vec<f64>,
    pub ci: Option<(f64, f64)>,
}

impl TestReport {
    pub fn new(statistic: f64, threshold: f64) -> Self {
        TestReport { statistic, threshold, reject: statistic > threshold, replicates: vec![], ci: None }
    }
}
