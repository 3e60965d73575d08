use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_finite, mackinnon, DiagnosticsError};

/// Minimum number of observations beyond the lag order.
const MIN_EXTRA_OBS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagPolicy {
    Fixed(usize),
    /// Pick the lag in `0..=max` with the lowest regression AIC; `None`
    /// uses [`default_max_lag`].
    AicAuto(Option<usize>),
}

impl Default for LagPolicy {
    fn default() -> Self {
        LagPolicy::AicAuto(None)
    }
}

/// `floor(12 * (n / 100)^(1/4))`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    #[serde(rename = "1%")]
    pub one: f64,
    #[serde(rename = "5%")]
    pub five: f64,
    #[serde(rename = "10%")]
    pub ten: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags_used: usize,
    pub n_obs: usize,
    pub critical_values: CriticalValues,
    pub log_transform_applied: bool,
    pub stationary_at_5pct: bool,
}

struct OlsFit {
    ssr: f64,
    nobs: usize,
    ncols: usize,
    gamma_t: f64,
}

/// Regress `dy[t]` on `[1, y[t-1], dy[t-1], ..., dy[t-k]]` for
/// `t` in `first..dy.len()` (indices into `dy`).
fn adf_regression(
    y: &[f64],
    dy: &[f64],
    k: usize,
    first: usize,
) -> Result<OlsFit, DiagnosticsError> {
    let nobs = dy.len() - first;
    let ncols = 2 + k;
    let x = DMatrix::from_fn(nobs, ncols, |r, c| {
        let t = first + r;
        match c {
            0 => 1.0,
            1 => y[t],
            _ => dy[t - (c - 1)],
        }
    });
    let target = DVector::from_iterator(nobs, dy[first..].iter().copied());

    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r.diagonal()
        .iter()
        .any(|v| v.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE))
    {
        return Err(DiagnosticsError::Singular);
    }
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(ncols, ncols))
        .ok_or(DiagnosticsError::Singular)?;
    let beta = &r_inv * (qr.q().transpose() * &target);
    let resid = &target - &x * &beta;
    let ssr = resid.norm_squared();

    // var(beta_1) = s^2 * [(X'X)^-1]_11 = s^2 * ||row 1 of R^-1||^2
    let row1: f64 = r_inv.row(1).iter().map(|v| v * v).sum();
    let dof = nobs as f64 - ncols as f64;
    let se = (ssr / dof * row1).sqrt();
    Ok(OlsFit {
        ssr,
        nobs,
        ncols,
        gamma_t: beta[1] / se,
    })
}

fn ols_aic(fit: &OlsFit) -> f64 {
    let n = fit.nobs as f64;
    let llf = -n / 2.0 * ((2.0 * std::f64::consts::PI * fit.ssr / n).ln() + 1.0);
    -2.0 * llf + 2.0 * fit.ncols as f64
}

/// Augmented Dickey-Fuller test with a constant and no trend.
///
/// Under [`LagPolicy::AicAuto`] every candidate lag is fitted on the common
/// sample that the largest lag allows, then the chosen lag is refitted on
/// its full sample. Critical values use that final regression's size.
pub fn adf_test(values: &[f64], policy: LagPolicy) -> Result<AdfResult, DiagnosticsError> {
    check_finite(values)?;
    let n = values.len();
    let max_lag = match policy {
        LagPolicy::Fixed(k) => k,
        LagPolicy::AicAuto(max) => max.unwrap_or_else(|| default_max_lag(n)),
    };
    let needed = MIN_EXTRA_OBS + max_lag;
    if n < needed {
        return Err(DiagnosticsError::TooShort { needed, got: n });
    }
    let dy: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();

    let lag = match policy {
        LagPolicy::Fixed(k) => k,
        LagPolicy::AicAuto(_) => {
            let mut best = (f64::INFINITY, 0);
            for k in 0..=max_lag {
                let fit = adf_regression(values, &dy, k, max_lag)?;
                let aic = ols_aic(&fit);
                if aic < best.0 {
                    best = (aic, k);
                }
            }
            best.1
        }
    };
    let fit = adf_regression(values, &dy, lag, lag)?;
    let (one, five, ten) = mackinnon::critical_values(fit.nobs);
    let statistic = fit.gamma_t;
    Ok(AdfResult {
        statistic,
        p_value: mackinnon::p_value(statistic),
        lags_used: lag,
        n_obs: fit.nobs,
        critical_values: CriticalValues { one, five, ten },
        log_transform_applied: false,
        stationary_at_5pct: statistic < five,
    })
}
