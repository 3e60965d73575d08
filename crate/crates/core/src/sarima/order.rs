use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SarimaError;

/// `(p, d, q)(P, D, Q)_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SarimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub seasonal_p: usize,
    pub seasonal_d: usize,
    pub seasonal_q: usize,
    /// Seasonal period; 0 when the model has no seasonal part.
    pub period: usize,
}

impl SarimaOrder {
    pub fn new(
        (p, d, q): (usize, usize, usize),
        (seasonal_p, seasonal_d, seasonal_q, period): (usize, usize, usize, usize),
    ) -> Result<Self, SarimaError> {
        let seasonal = seasonal_p + seasonal_d + seasonal_q > 0;
        let order = Self {
            p,
            d,
            q,
            seasonal_p,
            seasonal_d,
            seasonal_q,
            period: if seasonal { period } else { 0 },
        };
        let invalid = |reason: &str| SarimaError::InvalidOrder {
            order: order.to_string(),
            reason: reason.to_string(),
        };
        if d + seasonal_d > 3 {
            return Err(invalid("total differencing d + D exceeds 3"));
        }
        if seasonal && order.period < 2 {
            return Err(invalid("seasonal terms need a period of at least 2"));
        }
        Ok(order)
    }

    /// Non-seasonal ARMA(p, q) with no differencing.
    pub fn arma(p: usize, q: usize) -> Self {
        Self::new((p, 0, q), (0, 0, 0, 0)).expect("ARMA order is valid")
    }

    pub fn is_seasonal(&self) -> bool {
        self.period > 0
    }

    /// Number of ARMA coefficients (excluding intercept and variance).
    pub fn n_coefficients(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Observations consumed by differencing.
    pub fn differencing_loss(&self) -> usize {
        self.d + self.seasonal_d * self.period
    }

    /// Largest AR lag of the expanded polynomial.
    pub fn ar_span(&self) -> usize {
        self.p + self.seasonal_p * self.period
    }

    /// Minimum series length needed to fit: `10 + p + q + (P + Q + D) s + d`.
    pub fn min_length(&self) -> usize {
        10 + self.p
            + self.q
            + (self.seasonal_p + self.seasonal_q) * self.period
            + self.differencing_loss()
    }
}

impl fmt::Display for SarimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})({},{},{})_{}",
            self.p, self.d, self.q, self.seasonal_p, self.seasonal_d, self.seasonal_q, self.period
        )
    }
}

/// `p,d,q` or `p,d,q,P,D,Q,s`.
impl FromStr for SarimaOrder {
    type Err = SarimaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse()).collect();
        let bad = || SarimaError::InvalidOrder {
            order: s.to_string(),
            reason: "expected p,d,q or p,d,q,P,D,Q,s".into(),
        };
        match parts.map_err(|_| bad())?.as_slice() {
            &[p, d, q] => Self::new((p, d, q), (0, 0, 0, 0)),
            &[p, d, q, sp, sd, sq, period] => Self::new((p, d, q), (sp, sd, sq, period)),
            _ => Err(bad()),
        }
    }
}
