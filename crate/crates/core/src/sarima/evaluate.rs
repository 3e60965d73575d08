use serde::{Deserialize, Serialize};

use super::{Forecast, SarimaError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mse: f64,
    pub mean_se: f64,
    /// Fraction of actual values inside `[lower, upper]`.
    pub ci_coverage: f64,
}

pub fn evaluate(forecast: &Forecast, actual: &[f64]) -> Result<Metrics, SarimaError> {
    let n = forecast.point.len();
    if n != actual.len() || n == 0 {
        return Err(SarimaError::LengthMismatch {
            forecast: n,
            actual: actual.len(),
        });
    }
    let mse = forecast
        .point
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum::<f64>()
        / n as f64;
    let inside = actual
        .iter()
        .enumerate()
        .filter(|&(i, a)| forecast.lower[i] <= *a && *a <= forecast.upper[i])
        .count();
    Ok(Metrics {
        rmse: mse.sqrt(),
        mse,
        mean_se: forecast.se.iter().sum::<f64>() / n as f64,
        ci_coverage: inside as f64 / n as f64,
    })
}

/// Chronological split with `floor(n * fraction)` values in the training part.
pub fn train_test_split(series: &[f64], fraction: f64) -> Result<(&[f64], &[f64]), SarimaError> {
    let n = series.len();
    let bad = || SarimaError::BadSplit { fraction, len: n };
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(bad());
    }
    // the nudge keeps 0.7 * 100 at 70 despite rounding
    let cut = (n as f64 * fraction + 1e-9).floor() as usize;
    if cut == 0 || cut >= n {
        return Err(bad());
    }
    Ok(series.split_at(cut))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(point: Vec<f64>, se: f64) -> Forecast {
        let n = point.len();
        Forecast {
            horizon: n,
            lower: point.iter().map(|p| p - 2.0 * se).collect(),
            upper: point.iter().map(|p| p + 2.0 * se).collect(),
            point,
            se: vec![se; n],
            level: 0.95,
        }
    }

    #[test]
    fn perfect_and_zero_forecasts() {
        let m = evaluate(&flat(vec![1.0, 2.0], 0.5), &[1.0, 2.0]).unwrap();
        assert_eq!((m.rmse, m.ci_coverage, m.mean_se), (0.0, 1.0, 0.5));
        let m = evaluate(&flat(vec![0.0, 0.0], 1.0), &[3.0, 4.0]).unwrap();
        assert!((m.rmse - 12.5f64.sqrt()).abs() < 1e-12);
        assert!((m.mse - 12.5).abs() < 1e-12);
        assert_eq!(m.ci_coverage, 0.0);
        assert!(evaluate(&flat(vec![0.0], 1.0), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn splits() {
        let y: Vec<f64> = (0..100).map(f64::from).collect();
        let (a, b) = train_test_split(&y, 0.7).unwrap();
        assert_eq!((a.len(), b.len()), (70, 30));
        assert_eq!([a, b].concat(), y);
        let (a, b) = train_test_split(&y[..10], 0.5).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        assert!(train_test_split(&y, 1.0).is_err());
        assert!(train_test_split(&y[..1], 0.5).is_err());
    }
}
