use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("map is singular (sigma_min {sigma_min:e}, sigma_max {sigma_max:e})")]
    SingularMap { sigma_min: f64, sigma_max: f64 },

    #[error("map is ill-conditioned (condition number {cond:e} exceeds limit {limit:e})")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("mixing weight {0:e} is degenerate")]
    DegenerateWeight(f64),

    #[error("separability certification failed (q = {0:e})")]
    CertificationFailed(f64),

    #[error("no kernel direction of the map at s becomes distinguishable at t")]
    NoObstruction,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
