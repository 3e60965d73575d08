use super::{check_finite, DiagnosticsError};

/// Sample autocorrelation `r[0..=max_lag]`, normalized by the lag-0 sum
/// of squares so that `r[0] = 1` and `|r[k]| <= 1`.
pub fn acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagnosticsError> {
    check_finite(values)?;
    if max_lag == 0 || values.len() <= max_lag {
        return Err(DiagnosticsError::InvalidLag {
            lag: max_lag,
            len: values.len(),
        });
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|c| c * c).sum();
    if denom <= f64::EPSILON * mean.abs().max(1.0) * n as f64 {
        return Err(DiagnosticsError::ZeroVariance);
    }
    Ok((0..=max_lag)
        .map(|k| {
            let num: f64 = centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum();
            num / denom
        })
        .collect())
}

/// Candidate seasonal periods: lags in `2..=max_lag` where the ACF has a
/// local maximum above the `2/sqrt(n)` band, strongest first, at most
/// `limit` of them.
pub fn seasonal_candidates(
    values: &[f64],
    max_lag: usize,
    limit: usize,
) -> Result<Vec<usize>, DiagnosticsError> {
    let max_lag = max_lag.min(values.len().saturating_sub(1));
    if max_lag < 3 {
        return Ok(Vec::new());
    }
    let r = acf(values, max_lag)?;
    let band = 2.0 / (values.len() as f64).sqrt();
    let mut peaks: Vec<(usize, f64)> = (2..max_lag)
        .filter(|&k| r[k] > band && r[k] > r[k - 1] && r[k] >= r[k + 1])
        .map(|k| (k, r[k]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(peaks.into_iter().take(limit).map(|(k, _)| k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oracle(y: &[f64], max_lag: usize) -> Vec<f64> {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let mut out = Vec::new();
        let mut c0 = 0.0;
        for t in 0..y.len() {
            c0 += (y[t] - mean) * (y[t] - mean);
        }
        for k in 0..=max_lag {
            let mut ck = 0.0;
            for t in 0..y.len() - k {
                ck += (y[t] - mean) * (y[t + k] - mean);
            }
            out.push(ck / c0);
        }
        out
    }

    #[test]
    fn lag_zero_is_one() {
        let r = acf(&[1.0, 3.0, 2.0, 5.0, 4.0], 3).unwrap();
        assert_eq!(r.len(), 4);
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sinusoid_peaks_at_period_multiples() {
        let y: Vec<f64> = (0..120)
            .map(|t| (2.0 * PI * t as f64 / 12.0).sin())
            .collect();
        let r = acf(&y, 24).unwrap();
        assert!(r[12] > r[11] && r[12] > r[13]);
        let r = acf(&y, 25).unwrap();
        assert!(r[24] > r[23] && r[24] > r[25]);
        assert_eq!(seasonal_candidates(&y, 30, 3).unwrap()[0], 12);
    }

    #[test]
    fn constant_series_is_an_error() {
        assert!(matches!(
            acf(&[2.0; 10], 3),
            Err(DiagnosticsError::ZeroVariance)
        ));
        assert!(acf(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn matches_double_loop_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(5..80);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let max_lag = rng.random_range(1..n);
            let got = acf(&y, max_lag).unwrap();
            for (a, b) in got.iter().zip(oracle(&y, max_lag)) {
                assert!((a - b).abs() < 1e-12);
                assert!(a.abs() <= 1.0 + 1e-12);
            }
        }
    }
}
