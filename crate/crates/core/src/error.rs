use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure is supported on the vertex set of the simplex")]
    DegenerateMeasure,
    #[error("invalid simplex point: {0}")]
    InvalidPoint(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid precision config: {0}")]
    InvalidConfig(String),
    #[error("chi = {0} is outside (0, 1/2) or the vertex caps overlap")]
    InvalidChi(f64),
    #[error("root not bracketed on [3, 4]: psi(3) - 2 psi(2) = {at_three:.3e}, psi(4) - 2 psi(2) = {at_four:.3e}")]
    NoBracket { at_three: f64, at_four: f64 },
    #[error("all weights are zero")]
    AllZero,
    #[error("point is a vertex of the simplex")]
    VertexPoint,
    #[error("not in the Psi class: {0}")]
    NotInPsiClass(String),
    #[error("non-convexity counterexample failed: {0}")]
    CounterexampleFailed(String),
    #[error("scale K too small: filler mass {mass:.4} must be < 1")]
    ScaleTooSmall { mass: f64 },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("deck of {0} cards is too large for exact enumeration (max 8)")]
    TooLarge(usize),
    #[error("pile sequence has {got} steps, cold spots need more than {needed}")]
    TooFewSteps { needed: usize, got: usize },
    #[error("mixture is degenerate: {0}")]
    DegenerateMixture(String),
    #[error("digit quotas infeasible for cell {0}")]
    QuotaInfeasible(usize),
    #[error("invalid hypergeometric parameters n1={n1}, n={n}, m={m}")]
    InvalidParams { n1: u64, n: u64, m: u64 },
    #[error("invalid cut process: {0}")]
    InvalidProcess(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
