use serde::{Deserialize, Serialize};

use super::{check_finite, DiagnosticsError};

/// `ln(1 + v)` elementwise; the shift admits zero counts.
pub fn log_transform(values: &[f64]) -> Result<Vec<f64>, DiagnosticsError> {
    check_finite(values)?;
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(DiagnosticsError::NegativeValue { index, value });
    }
    Ok(values.iter().map(|v| v.ln_1p()).collect())
}

/// Lag-`n` difference `y[t] - y[t-n]`; the output is `n` shorter.
pub fn difference(values: &[f64], n: usize) -> Result<Vec<f64>, DiagnosticsError> {
    if n == 0 || n >= values.len() {
        return Err(DiagnosticsError::InvalidLag {
            lag: n,
            len: values.len(),
        });
    }
    Ok(values[n..]
        .iter()
        .zip(values)
        .map(|(cur, prev)| cur - prev)
        .collect())
}

/// The transforms applied to a series, in order: an optional `ln(1 + v)`
/// followed by differencing passes. Keeps the values each pass consumed so
/// the original series can be rebuilt exactly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub log_applied: bool,
    /// Lag of each differencing pass.
    pub differences: Vec<usize>,
    /// Leading values dropped by each pass, one entry per pass.
    pub initial_values: Vec<Vec<f64>>,
}

impl TransformRecord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        !self.log_applied && self.differences.is_empty()
    }

    /// Apply `ln(1 + v)`; must come before any differencing.
    pub fn apply_log(&mut self, values: &[f64]) -> Result<Vec<f64>, DiagnosticsError> {
        assert!(
            !self.log_applied && self.differences.is_empty(),
            "log must be the first transform"
        );
        let out = log_transform(values)?;
        self.log_applied = true;
        Ok(out)
    }

    pub fn apply_difference(
        &mut self,
        values: &[f64],
        n: usize,
    ) -> Result<Vec<f64>, DiagnosticsError> {
        let out = difference(values, n)?;
        self.differences.push(n);
        self.initial_values.push(values[..n].to_vec());
        Ok(out)
    }

    /// Length of the transformed series for an input of length `len`.
    pub fn transformed_len(&self, len: usize) -> usize {
        len.saturating_sub(self.differences.iter().sum())
    }

    /// Undo the differencing passes only, giving the series on the log
    /// scale if a log was applied.
    pub fn undifference(&self, transformed: &[f64]) -> Vec<f64> {
        let mut out = transformed.to_vec();
        for (lag, init) in self.differences.iter().zip(&self.initial_values).rev() {
            let mut rebuilt = Vec::with_capacity(out.len() + lag);
            rebuilt.extend_from_slice(init);
            for (t, d) in out.iter().enumerate() {
                let prev = rebuilt[t];
                rebuilt.push(prev + d);
            }
            out = rebuilt;
        }
        out
    }

    /// Rebuild the original series from its transformed version.
    pub fn invert(&self, transformed: &[f64]) -> Vec<f64> {
        let out = self.undifference(transformed);
        if self.log_applied {
            out.into_iter().map(f64::exp_m1).collect()
        } else {
            out
        }
    }
}

/// Trailing-window mean and population standard deviation.
pub fn rolling_stats(
    values: &[f64],
    window: usize,
) -> Result<(Vec<f64>, Vec<f64>), DiagnosticsError> {
    if window == 0 || window > values.len() {
        return Err(DiagnosticsError::InvalidLag {
            lag: window,
            len: values.len(),
        });
    }
    let w = window as f64;
    let (means, stds) = values
        .windows(window)
        .map(|win| {
            let mean = win.iter().sum::<f64>() / w;
            let var = win.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w;
            (mean, var.sqrt())
        })
        .unzip();
    Ok((means, stds))
}
