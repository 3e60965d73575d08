//! Conditional-sum-of-squares likelihood.

use serde::{Deserialize, Serialize};

use super::polynomial::{
    ar_polynomial, constrain_invertible, constrain_stationary, ma_polynomial, multiply,
    sparse_tail, unconstrain_invertible, unconstrain_stationary,
};
use super::SarimaOrder;

/// ARMA coefficients of a seasonal model plus the mean of the differenced
/// series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    pub intercept: f64,
}

impl Coefficients {
    pub fn fits(&self, order: &SarimaOrder) -> bool {
        self.ar.len() == order.p
            && self.ma.len() == order.q
            && self.sar.len() == order.seasonal_p
            && self.sma.len() == order.seasonal_q
    }

    /// Expanded `phi(B) PHI(B^s)` and `theta(B) THETA(B^s)`.
    pub fn polynomials(&self, period: usize) -> (Vec<f64>, Vec<f64>) {
        let s = period.max(1);
        let ar = multiply(&ar_polynomial(&self.ar, 1), &ar_polynomial(&self.sar, s));
        let ma = multiply(&ma_polynomial(&self.ma, 1), &ma_polynomial(&self.sma, s));
        (ar, ma)
    }
}

/// Innovations of the SARMA recursion on a differenced series with zero
/// pre-sample values:
/// `e_t = z_t + sum a_k z_{t-k} - sum m_k e_{t-k}` where `z = w - mu`,
/// `a` is the AR polynomial tail and `m` the MA polynomial tail.
pub(crate) fn residuals_into(
    w: &[f64],
    mean: f64,
    ar_tail: &[(usize, f64)],
    ma_tail: &[(usize, f64)],
    z: &mut Vec<f64>,
    e: &mut Vec<f64>,
) {
    z.clear();
    e.clear();
    z.extend(w.iter().map(|v| v - mean));
    for t in 0..w.len() {
        let mut v = z[t];
        for &(k, c) in ar_tail {
            if k > t {
                break;
            }
            v += c * z[t - k];
        }
        for &(k, c) in ma_tail {
            if k > t {
                break;
            }
            v -= c * e[t - k];
        }
        e.push(v);
    }
}

pub(crate) fn gaussian_loglik(sse: f64, n: usize) -> f64 {
    let n = n as f64;
    let sigma2 = sse / n;
    -n / 2.0 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0)
}

/// CSS likelihood of one order on one differenced series.
///
/// The optimizer works on unconstrained parameters laid out as
/// `[ar, ma, sar, sma, intercept]`. Each polynomial block is mapped through
/// the partial-autocorrelation transform, so any real vector decodes to a
/// stationary and invertible model. The intercept is stored as
/// `center + scale * x` to keep the simplex well conditioned.
#[derive(Debug, Clone)]
pub struct CssProblem<'a> {
    differenced: &'a [f64],
    order: SarimaOrder,
    skip: usize,
    center: f64,
    scale: f64,
}

impl<'a> CssProblem<'a> {
    /// `skip` leading innovations are computed but left out of the sum of
    /// squares.
    pub fn new(differenced: &'a [f64], order: SarimaOrder, skip: usize) -> Self {
        let used = &differenced[skip.min(differenced.len())..];
        let n = used.len().max(1) as f64;
        let center = used.iter().sum::<f64>() / n;
        let var = used.iter().map(|v| (v - center).powi(2)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        Self {
            differenced,
            order,
            skip,
            center,
            scale,
        }
    }

    pub fn n_params(&self) -> usize {
        self.order.n_coefficients() + 1
    }

    /// Innovations entering the likelihood.
    pub fn n_effective(&self) -> usize {
        self.differenced.len().saturating_sub(self.skip)
    }

    pub fn sample_mean(&self) -> f64 {
        self.center
    }

    pub fn decode(&self, x: &[f64]) -> Coefficients {
        let o = &self.order;
        let (ar, rest) = x.split_at(o.p);
        let (ma, rest) = rest.split_at(o.q);
        let (sar, rest) = rest.split_at(o.seasonal_p);
        let (sma, rest) = rest.split_at(o.seasonal_q);
        Coefficients {
            ar: constrain_stationary(ar),
            ma: constrain_invertible(ma),
            sar: constrain_stationary(sar),
            sma: constrain_invertible(sma),
            intercept: self.center + self.scale * rest[0],
        }
    }

    /// Unconstrained vector for `coefs`, or `None` if they are not
    /// stationary and invertible.
    pub fn encode(&self, coefs: &Coefficients) -> Option<Vec<f64>> {
        let mut x = unconstrain_stationary(&coefs.ar)?;
        x.extend(unconstrain_invertible(&coefs.ma)?);
        x.extend(unconstrain_stationary(&coefs.sar)?);
        x.extend(unconstrain_invertible(&coefs.sma)?);
        x.push((coefs.intercept - self.center) / self.scale);
        Some(x)
    }

    /// Sum of squared innovations for `coefs` over the likelihood window.
    pub fn sse(&self, coefs: &Coefficients) -> f64 {
        let (ar, ma) = coefs.polynomials(self.order.period);
        let (mut z, mut e) = (Vec::new(), Vec::new());
        residuals_into(
            self.differenced,
            coefs.intercept,
            &sparse_tail(&ar),
            &sparse_tail(&ma),
            &mut z,
            &mut e,
        );
        e[self.skip.min(e.len())..].iter().map(|v| v * v).sum()
    }

    pub fn loglik_at(&self, coefs: &Coefficients) -> f64 {
        let sse = self.sse(coefs);
        let ll = gaussian_loglik(sse, self.n_effective());
        if ll.is_finite() {
            ll
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Profile log-likelihood at unconstrained `x`; `-inf` when the
    /// innovations are not finite.
    pub fn loglik(&self, x: &[f64]) -> f64 {
        self.loglik_at(&self.decode(x))
    }
}

/// Conditional log-likelihood of `order` at unconstrained `params` on an
/// already-differenced `series`, using every innovation.
pub fn css_objective(params: &[f64], series: &[f64], order: &SarimaOrder) -> f64 {
    CssProblem::new(series, *order, 0).loglik(params)
}
