//! Seasonal ARIMA engine.
//!
//! Models follow the multiplicative form
//!
//! ```text
//! phi(B) PHI(B^s) (w_t - mu) = theta(B) THETA(B^s) e_t,   w = (1-B)^d (1-B^s)^D y
//! ```
//!
//! with `phi(B) = 1 - sum phi_i B^i` and `theta(B) = 1 + sum theta_i B^i`.
//! Parameters are estimated by maximizing the conditional-sum-of-squares
//! Gaussian likelihood with `sigma^2` profiled out.

mod css;
mod evaluate;
mod fit;
mod forecast;
mod grid;
mod normal;
mod optimizer;
mod order;
pub mod polynomial;
mod simulate;

use thiserror::Error;

pub use css::{css_objective, Coefficients, CssProblem};
pub use evaluate::{evaluate, train_test_split, Metrics};
pub use fit::{fit, OptimizerConfig, SarimaModel};
pub use forecast::{forecast, psi_weights, Forecast};
pub use grid::{grid_search, GridOutcome, GridSpec, LeaderboardEntry};
pub use normal::{normal_cdf, normal_quantile};
pub use optimizer::{nelder_mead, NelderMeadResult};
pub use order::SarimaOrder;
pub use simulate::simulate;

#[derive(Debug, Error)]
pub enum SarimaError {
    #[error("invalid order {order}: {reason}")]
    InvalidOrder { order: String, reason: String },
    #[error("series too short for {order}: need {needed} values, got {got}")]
    TooShort {
        order: String,
        needed: usize,
        got: usize,
    },
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("series has zero variance after differencing")]
    Degenerate,
    #[error("coefficients are not stationary/invertible: {0}")]
    Explosive(String),
    #[error("coefficient count does not match order {0}")]
    CoefficientMismatch(String),
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("confidence level must be in (0, 1), got {0}")]
    BadLevel(f64),
    #[error("length mismatch: forecast has {forecast} steps, actual has {actual}")]
    LengthMismatch { forecast: usize, actual: usize },
    #[error("train fraction {fraction} gives degenerate split of {len} values")]
    BadSplit { fraction: f64, len: usize },
    #[error("no candidate order converged ({} failures)", .0.len())]
    NoConvergence(Vec<(String, String)>),
    #[error("grid has no candidate orders")]
    EmptyGrid,
}
