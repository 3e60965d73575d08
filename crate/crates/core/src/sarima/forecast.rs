use serde::{Deserialize, Serialize};

use super::css::residuals_into;
use super::fit::{difference_series, SarimaModel};
use super::normal::normal_quantile;
use super::polynomial::{differencing_polynomial, multiply, sparse_tail};
use super::SarimaError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub horizon: usize,
    pub point: Vec<f64>,
    pub se: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

impl Forecast {
    fn from_point_se(point: Vec<f64>, se: Vec<f64>, level: f64) -> Self {
        let z = normal_quantile((1.0 + level) / 2.0);
        let lower = point.iter().zip(&se).map(|(p, s)| p - z * s).collect();
        let upper = point.iter().zip(&se).map(|(p, s)| p + z * s).collect();
        Self {
            horizon: point.len(),
            point,
            se,
            lower,
            upper,
            level,
        }
    }

    /// Map a forecast of `ln(1 + y)` back to `y`.
    ///
    /// Point and bounds go through `expm1` one by one; `se` becomes the
    /// back-transformed interval half-width divided by the same normal
    /// quantile, so `upper - lower = 2 z se` still holds.
    pub fn expm1(&self) -> Forecast {
        let z = normal_quantile((1.0 + self.level) / 2.0);
        let lower: Vec<f64> = self.lower.iter().map(|v| v.exp_m1()).collect();
        let upper: Vec<f64> = self.upper.iter().map(|v| v.exp_m1()).collect();
        let se = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (u - l) / (2.0 * z))
            .collect();
        Forecast {
            horizon: self.horizon,
            point: self.point.iter().map(|v| v.exp_m1()).collect(),
            se,
            lower,
            upper,
            level: self.level,
        }
    }
}

/// First `n` weights of `theta(B) THETA(B^s) / [phi(B) PHI(B^s) delta(B)]`
/// where `delta` is the model's differencing polynomial.
pub fn psi_weights(model: &SarimaModel, n: usize) -> Vec<f64> {
    let o = &model.order;
    let (ar, ma) = model.coefficients().polynomials(o.period);
    let full_ar = multiply(&ar, &differencing_polynomial(o.d, o.seasonal_d, o.period));
    let ar_tail = sparse_tail(&full_ar);
    let mut psi = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = ma.get(j).copied().unwrap_or(0.0);
        if j == 0 {
            v = 1.0;
        }
        for &(k, c) in &ar_tail {
            if k > j {
                break;
            }
            v -= c * psi[j - k];
        }
        psi.push(v);
    }
    psi
}

/// Forecast `horizon` steps past the end of `history`, the undifferenced
/// series the model was fitted on.
pub fn forecast(
    model: &SarimaModel,
    history: &[f64],
    horizon: usize,
    level: f64,
) -> Result<Forecast, SarimaError> {
    if horizon == 0 {
        return Err(SarimaError::BadHorizon);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(SarimaError::BadLevel(level));
    }
    let o = &model.order;
    if history.len() <= o.differencing_loss() {
        return Err(SarimaError::TooShort {
            order: o.to_string(),
            needed: o.differencing_loss() + 1,
            got: history.len(),
        });
    }
    let (ar, ma) = model.coefficients().polynomials(o.period);
    let (ar_tail, ma_tail) = (sparse_tail(&ar), sparse_tail(&ma));
    let w = difference_series(history, o);
    let (mut z, mut e) = (Vec::new(), Vec::new());
    residuals_into(&w, model.intercept, &ar_tail, &ma_tail, &mut z, &mut e);

    let n = w.len();
    for t in n..n + horizon {
        let mut v = 0.0;
        for &(k, c) in &ar_tail {
            if k > t {
                break;
            }
            v -= c * z[t - k];
        }
        for &(k, c) in &ma_tail {
            if k > t {
                break;
            }
            v += c * e[t - k];
        }
        z.push(v);
        e.push(0.0);
    }

    let delta = differencing_polynomial(o.d, o.seasonal_d, o.period);
    let delta_tail = sparse_tail(&delta);
    let mut y = history.to_vec();
    for j in 0..horizon {
        let mut v = z[n + j] + model.intercept;
        let t = y.len();
        for &(k, c) in &delta_tail {
            v -= c * y[t - k];
        }
        y.push(v);
    }
    let point = y.split_off(history.len());

    let sigma = model.sigma2.sqrt();
    let mut acc = 0.0;
    let se = psi_weights(model, horizon)
        .into_iter()
        .map(|p| {
            acc += p * p;
            sigma * acc.sqrt()
        })
        .collect();
    Ok(Forecast::from_point_se(point, se, level))
}
