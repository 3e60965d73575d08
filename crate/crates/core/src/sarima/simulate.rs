use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::css::Coefficients;
use super::polynomial::{differencing_polynomial, is_invertible, is_stationary, sparse_tail};
use super::{SarimaError, SarimaOrder};

/// Draw `n` values of a seasonal ARIMA process.
///
/// Innovations are `sigma` times ChaCha8 standard normals. The SARMA part
/// runs for `10 (s + p + q)` burn-in steps first; the kept values are then
/// integrated from zero initial conditions.
pub fn simulate(
    order: &SarimaOrder,
    coefficients: &Coefficients,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, SarimaError> {
    if !coefficients.fits(order) {
        return Err(SarimaError::CoefficientMismatch(order.to_string()));
    }
    for (name, ok) in [
        ("ar", is_stationary(&coefficients.ar)),
        ("ma", is_invertible(&coefficients.ma)),
        ("sar", is_stationary(&coefficients.sar)),
        ("sma", is_invertible(&coefficients.sma)),
    ] {
        if !ok {
            return Err(SarimaError::Explosive(name.to_string()));
        }
    }
    if n == 0 {
        return Err(SarimaError::TooShort {
            order: order.to_string(),
            needed: 1,
            got: 0,
        });
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(SarimaError::Explosive(format!("sigma = {sigma}")));
    }

    let (ar, ma) = coefficients.polynomials(order.period);
    let (ar_tail, ma_tail) = (sparse_tail(&ar), sparse_tail(&ma));
    let burn = 10 * (order.period + order.p + order.q);
    let total = burn + n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e: Vec<f64> = (0..total)
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            sigma * v
        })
        .collect();
    let mut z: Vec<f64> = Vec::with_capacity(total);
    for t in 0..total {
        let mut v = e[t];
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
    }

    let delta = differencing_polynomial(order.d, order.seasonal_d, order.period);
    let delta_tail = sparse_tail(&delta);
    let mut y: Vec<f64> = Vec::with_capacity(n);
    for (t, zt) in z[burn..].iter().enumerate() {
        let mut v = zt + coefficients.intercept;
        for &(k, c) in &delta_tail {
            if k <= t {
                v -= c * y[t - k];
            }
        }
        y.push(v);
    }
    Ok(y)
}
