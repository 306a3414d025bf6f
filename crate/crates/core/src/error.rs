use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("inertia matrix is not symmetric positive definite")]
    InertiaNotSpd,

    #[error("reference vectors are collinear (need at least two non-collinear directions)")]
    CollinearReferences,

    #[error("expected {expected} entries for {what}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("filter weight Λ_{index} is not symmetric positive definite")]
    FilterWeightNotSpd { index: usize },

    #[error("filter polynomial P_{index} is not positive on the spectrum of Λ_{index} (P({eigenvalue}) = {value})")]
    FilterPolynomialNotPositive {
        index: usize,
        eigenvalue: f64,
        value: f64,
    },

    #[error("controller gain ρ_{index} = {value} must be positive")]
    NonPositiveGain { index: usize, value: f64 },

    #[error("measurement matrix M is singular (|det M| = {det:e})")]
    SingularM { det: f64 },

    #[error("W_ρ is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    WRhoNotSpd { min_eigenvalue: f64 },

    #[error("W_ρ has a repeated eigenvalue (smallest gap {gap:e}); genericity hypothesis violated")]
    GenViolation { gap: f64 },

    #[error("integration diverged at t = {t}")]
    IntegrationBlowUp { t: f64 },

    #[error("quaternion norm drifted by {deviation:e} in one step at t = {t}")]
    NormDrift { t: f64, deviation: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("parameter κ[{index}] = {value} must be strictly positive")]
    NonPositiveParameter { index: usize, value: f64 },

    #[error("every optimizer start diverged")]
    AllStartsDiverged,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
