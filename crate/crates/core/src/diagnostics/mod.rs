//! Stationarity and seasonality toolkit.

mod acf;
mod adf;
pub mod mackinnon;
mod stationarize;
mod transform;

use thiserror::Error;

pub use acf::{acf, seasonal_candidates};
pub use adf::{adf_test, default_max_lag, AdfResult, CriticalValues, LagPolicy};
pub use stationarize::{stationarize, Stationarized, MAX_DIFFERENCES};
pub use transform::{difference, log_transform, rolling_stats, TransformRecord};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid lag {lag} for series of length {len}")]
    InvalidLag { lag: usize, len: usize },
    #[error("negative value {value} at index {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("regression matrix is singular")]
    Singular,
    #[error("transformed series of length {got} does not match record (expected {expected})")]
    RecordMismatch { expected: usize, got: usize },
    #[error("series still non-stationary after {passes} differencing passes (ADF statistic {statistic:.4})", passes = .0.record.differences.len(), statistic = .0.adf.statistic)]
    NotStationary(Box<Stationarized>),
}

pub(crate) fn check_finite(values: &[f64]) -> Result<(), DiagnosticsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(DiagnosticsError::NonFinite(i)),
        None => Ok(()),
    }
}
