use thiserror::Error;

/// Errors produced by the numerical workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("non-finite values detected in {0}")]
    NonFinite(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("characteristic inversion failed at x = {x:?}, t = {t}: residual {residual:e} after {iterations} iterations")]
    CharacteristicInversion {
        x: Vec<f64>,
        t: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("CFL condition violated: number {cfl:.4} exceeds {limit} at tau = {tau}")]
    Cfl { cfl: f64, limit: f64, tau: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no theorem prediction: {0}")]
    Inadmissible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
