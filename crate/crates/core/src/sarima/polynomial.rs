//! Lag polynomials and the partial-autocorrelation reparameterization.
//!
//! Polynomials are coefficient vectors in powers of the backshift operator,
//! `[c0, c1, ...]` meaning `c0 + c1 B + c2 B^2 + ...`.

pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `1 - sum phi_i B^(i * lag)`.
pub fn ar_polynomial(coefs: &[f64], lag: usize) -> Vec<f64> {
    let mut out = vec![0.0; coefs.len() * lag + 1];
    out[0] = 1.0;
    for (i, c) in coefs.iter().enumerate() {
        out[(i + 1) * lag] = -c;
    }
    out
}

/// `1 + sum theta_i B^(i * lag)`.
pub fn ma_polynomial(coefs: &[f64], lag: usize) -> Vec<f64> {
    let mut out = vec![0.0; coefs.len() * lag + 1];
    out[0] = 1.0;
    for (i, c) in coefs.iter().enumerate() {
        out[(i + 1) * lag] = *c;
    }
    out
}

/// `(1 - B)^d (1 - B^s)^D`.
pub fn differencing_polynomial(d: usize, seasonal_d: usize, period: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..d {
        out = multiply(&out, &[1.0, -1.0]);
    }
    for _ in 0..seasonal_d {
        out = multiply(&out, &ar_polynomial(&[1.0], period));
    }
    out
}

/// Nonzero `(lag, coefficient)` pairs for lags >= 1.
pub fn sparse_tail(poly: &[f64]) -> Vec<(usize, f64)> {
    poly.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| (k, *c))
        .collect()
}

/// Map unconstrained reals to AR coefficients whose polynomial
/// `1 - sum phi_i B^i` has all roots outside the unit circle.
///
/// Each input becomes a partial autocorrelation `tanh(x)`; the
/// Durbin-Levinson recursion turns those into coefficients.
pub fn constrain_stationary(unconstrained: &[f64]) -> Vec<f64> {
    let partials: Vec<f64> = unconstrained.iter().map(|x| x.tanh()).collect();
    from_partials(&partials)
}

fn from_partials(partials: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(partials.len());
    for (k, &r) in partials.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    phi
}

/// Step-down recursion giving the partial autocorrelations of an AR
/// polynomial; `None` if some partial has modulus >= 1.
pub fn partials(coefs: &[f64]) -> Option<Vec<f64>> {
    let mut phi = coefs.to_vec();
    let mut out = vec![0.0; coefs.len()];
    for k in (0..coefs.len()).rev() {
        let r = phi[k];
        if !r.is_finite() || r.abs() >= 1.0 {
            return None;
        }
        out[k] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k)
            .map(|j| (phi[j] + r * phi[k - 1 - j]) / denom)
            .collect();
        phi.truncate(k);
        phi.copy_from_slice(&prev);
    }
    Some(out)
}

/// Inverse of [`constrain_stationary`].
pub fn unconstrain_stationary(coefs: &[f64]) -> Option<Vec<f64>> {
    partials(coefs).map(|p| p.into_iter().map(f64::atanh).collect())
}

/// Whether `1 - sum phi_i B^i` has all roots outside the unit circle.
pub fn is_stationary(coefs: &[f64]) -> bool {
    partials(coefs).is_some()
}

/// Whether `1 + sum theta_i B^i` has all roots outside the unit circle.
pub fn is_invertible(coefs: &[f64]) -> bool {
    let neg: Vec<f64> = coefs.iter().map(|c| -c).collect();
    is_stationary(&neg)
}

/// MA coefficients from unconstrained reals, invertible by construction.
pub fn constrain_invertible(unconstrained: &[f64]) -> Vec<f64> {
    constrain_stationary(unconstrained)
        .into_iter()
        .map(|c| -c)
        .collect()
}

pub fn unconstrain_invertible(coefs: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<f64> = coefs.iter().map(|c| -c).collect();
    unconstrain_stationary(&neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn multiply_and_differencing() {
        assert_eq!(multiply(&[1.0, -0.5], &[1.0, 0.3]), vec![1.0, -0.2, -0.15]);
        assert_eq!(differencing_polynomial(1, 0, 0), vec![1.0, -1.0]);
        assert_eq!(differencing_polynomial(2, 0, 0), vec![1.0, -2.0, 1.0]);
        assert_eq!(
            differencing_polynomial(1, 1, 3),
            vec![1.0, -1.0, 0.0, -1.0, 1.0]
        );
        assert_eq!(ar_polynomial(&[0.5], 12)[12], -0.5);
    }

    #[test]
    fn ar1_transform() {
        let phi = constrain_stationary(&[0.5]);
        assert!((phi[0] - 0.5f64.tanh()).abs() < 1e-15);
        assert!(is_stationary(&[0.99]));
        assert!(!is_stationary(&[1.0]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_invertible(&[0.3]) && !is_invertible(&[-1.2]));
    }

    proptest! {
        #[test]
        fn round_trip(x in prop::collection::vec(-3.0f64..3.0, 0..6)) {
            let coefs = constrain_stationary(&x);
            let back = unconstrain_stationary(&coefs).unwrap();
            let again = constrain_stationary(&back);
            for (a, b) in again.iter().zip(&coefs) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            let ma = constrain_invertible(&x);
            let again = constrain_invertible(&unconstrain_invertible(&ma).unwrap());
            for (a, b) in again.iter().zip(&ma) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
