//! MacKinnon response surfaces for the Dickey-Fuller tau statistic with a
//! constant and no trend (one integrated variable).

use crate::sarima::normal_cdf;

/// Finite-sample critical-value surface `b0 + b1/T + b2/T^2 + b3/T^3`
/// for the 1%, 5% and 10% levels (MacKinnon 2010).
const TAU_C_CRIT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

// p-value surfaces (MacKinnon 1994): Phi of a polynomial in tau.
const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const TAU_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

fn poly(coefs: &[f64], x: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Critical values `(1%, 5%, 10%)` for a regression with `nobs` observations.
pub fn critical_values(nobs: usize) -> (f64, f64, f64) {
    let inv = 1.0 / nobs as f64;
    let cv = |row: &[f64; 4]| poly(row, inv);
    (cv(&TAU_C_CRIT[0]), cv(&TAU_C_CRIT[1]), cv(&TAU_C_CRIT[2]))
}

/// Approximate asymptotic p-value of a tau statistic.
pub fn p_value(tau: f64) -> f64 {
    if tau > TAU_MAX {
        return 1.0;
    }
    if tau < TAU_MIN {
        return 0.0;
    }
    let z = if tau <= TAU_STAR {
        poly(&TAU_SMALLP, tau)
    } else {
        poly(&TAU_LARGEP, tau)
    };
    normal_cdf(z)
}
