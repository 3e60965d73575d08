use serde::{Deserialize, Serialize};

use super::css::{Coefficients, CssProblem};
use super::optimizer::nelder_mead;
use super::polynomial::differencing_polynomial;
use super::{SarimaError, SarimaOrder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Evaluation budget for each simplex run.
    pub max_evals: usize,
    /// Convergence threshold on objective improvement over a simplex cycle.
    pub tol: f64,
    /// Initial simplex edge in the unconstrained space.
    pub step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            tol: 1e-8,
            step: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaModel {
    pub order: SarimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    /// Mean of the differenced series.
    pub intercept: f64,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    /// Innovations in the likelihood.
    pub n_fit: usize,
    pub converged: bool,
}

impl SarimaModel {
    pub fn coefficients(&self) -> Coefficients {
        Coefficients {
            ar: self.ar.clone(),
            ma: self.ma.clone(),
            sar: self.sar.clone(),
            sma: self.sma.clone(),
            intercept: self.intercept,
        }
    }

    /// Free parameters counted by the AIC: ARMA terms, intercept and variance.
    pub fn n_params(&self) -> usize {
        self.order.n_coefficients() + 2
    }
}

/// `(1 - B)^d (1 - B^s)^D y`, dropping the first `d + D s` values.
pub fn difference_series(y: &[f64], order: &SarimaOrder) -> Vec<f64> {
    let delta = differencing_polynomial(order.d, order.seasonal_d, order.period);
    let loss = delta.len() - 1;
    (loss..y.len())
        .map(|t| delta.iter().enumerate().map(|(k, c)| c * y[t - k]).sum())
        .collect()
}

/// Fit `order` to `series` by maximizing the conditional likelihood.
///
/// The series is differenced inside the model, so pass the undifferenced
/// values. A model whose restarts all fail to converge is still returned,
/// with `converged = false`.
pub fn fit(
    series: &[f64],
    order: &SarimaOrder,
    config: &OptimizerConfig,
) -> Result<SarimaModel, SarimaError> {
    fit_aligned(series, order, config, 0)
}

/// [`fit`] leaving the first `skip` differenced innovations out of the
/// likelihood, so models with different differencing can share one sample.
pub(crate) fn fit_aligned(
    series: &[f64],
    order: &SarimaOrder,
    config: &OptimizerConfig,
    skip: usize,
) -> Result<SarimaModel, SarimaError> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(SarimaError::NonFinite);
    }
    let needed = order.min_length() + skip;
    if series.len() < needed {
        return Err(SarimaError::TooShort {
            order: order.to_string(),
            needed,
            got: series.len(),
        });
    }
    let w = difference_series(series, order);
    let problem = CssProblem::new(&w, *order, skip);
    let used = &w[skip..];
    let n = used.len() as f64;
    let var = used
        .iter()
        .map(|v| (v - problem.sample_mean()).powi(2))
        .sum::<f64>()
        / n;
    if !(var > 1e-12 * (1.0 + problem.sample_mean().powi(2))) {
        return Err(SarimaError::Degenerate);
    }

    if order.n_coefficients() == 0 {
        let coefs = Coefficients {
            intercept: problem.sample_mean(),
            ..Default::default()
        };
        return Ok(build_model(&problem, order, coefs, true));
    }

    let objective = |x: &[f64]| -problem.loglik(x);
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for x0 in starting_points(order) {
        let res = nelder_mead(objective, &x0, config.step, config.tol, config.max_evals);
        if best.as_ref().map_or(true, |b| res.value < b.1) {
            best = Some((res.x, res.value, res.converged));
        }
    }
    let (x, value, converged) = best.expect("at least one starting point");
    // a fresh simplex around the best point escapes premature collapse
    let polish = nelder_mead(
        objective,
        &x,
        config.step / 3.0,
        config.tol,
        config.max_evals,
    );
    let (x, converged) = if polish.value <= value {
        (polish.x, polish.converged || converged)
    } else {
        (x, converged)
    };
    if !converged {
        log::warn!("fit of {order} did not converge");
    }
    Ok(build_model(&problem, order, problem.decode(&x), converged))
}

fn build_model(
    problem: &CssProblem<'_>,
    order: &SarimaOrder,
    coefs: Coefficients,
    converged: bool,
) -> SarimaModel {
    let n_fit = problem.n_effective();
    let sse = problem.sse(&coefs);
    let loglik = problem.loglik_at(&coefs);
    let k = order.n_coefficients() + 2;
    SarimaModel {
        order: *order,
        ar: coefs.ar,
        ma: coefs.ma,
        sar: coefs.sar,
        sma: coefs.sma,
        intercept: coefs.intercept,
        sigma2: sse / n_fit as f64,
        loglik,
        aic: -2.0 * loglik + 2.0 * k as f64,
        n_fit,
        converged,
    }
}

/// Zeros; small positive AR partials; small negative MA coefficients.
fn starting_points(order: &SarimaOrder) -> Vec<Vec<f64>> {
    let blocks = [
        (order.p, true),
        (order.q, false),
        (order.seasonal_p, true),
        (order.seasonal_q, false),
    ];
    let build = |ar: f64, ma: f64| -> Vec<f64> {
        let mut x = Vec::new();
        for &(len, is_ar) in &blocks {
            x.extend(std::iter::repeat(if is_ar { ar } else { ma }).take(len));
        }
        x.push(0.0);
        x
    };
    // an MA block at x decodes to theta_1 = -tanh(x)
    let candidates = [build(0.0, 0.0), build(0.1, 0.0), build(0.0, 0.1)];
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}
