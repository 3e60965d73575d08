use serde::{Deserialize, Serialize};

use super::{adf_test, AdfResult, DiagnosticsError, LagPolicy, TransformRecord};

/// Upper bound on first-differencing passes.
pub const MAX_DIFFERENCES: usize = 2;
const MIN_LEN: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stationarized {
    pub series: Vec<f64>,
    pub record: TransformRecord,
    pub adf: AdfResult,
}

/// Transform a series until the ADF test rejects a unit root at 5%.
///
/// Order of attempts: the raw series; `ln(1 + v)` (skipped when the series
/// has negative values); then up to [`MAX_DIFFERENCES`] first differences,
/// retesting after each. The error carries the last attempt, whose record
/// still inverts exactly.
pub fn stationarize(values: &[f64]) -> Result<Stationarized, DiagnosticsError> {
    if values.len() < MIN_LEN {
        return Err(DiagnosticsError::TooShort {
            needed: MIN_LEN,
            got: values.len(),
        });
    }
    let policy = LagPolicy::default();
    let mut record = TransformRecord::identity();
    let mut series = values.to_vec();
    let mut adf = adf_test(&series, policy)?;
    if adf.stationary_at_5pct {
        return Ok(Stationarized {
            series,
            record,
            adf,
        });
    }

    if series.iter().all(|v| *v >= 0.0) {
        series = record.apply_log(&series)?;
        adf = retest(&series, &record, policy)?;
        if adf.stationary_at_5pct {
            return Ok(Stationarized {
                series,
                record,
                adf,
            });
        }
    }

    for _ in 0..MAX_DIFFERENCES {
        series = record.apply_difference(&series, 1)?;
        adf = retest(&series, &record, policy)?;
        if adf.stationary_at_5pct {
            return Ok(Stationarized {
                series,
                record,
                adf,
            });
        }
    }
    Err(DiagnosticsError::NotStationary(Box::new(Stationarized {
        series,
        record,
        adf,
    })))
}

fn retest(
    series: &[f64],
    record: &TransformRecord,
    policy: LagPolicy,
) -> Result<AdfResult, DiagnosticsError> {
    let mut adf = adf_test(series, policy)?;
    adf.log_transform_applied = record.log_applied;
    Ok(adf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn white_noise_is_a_fixpoint() {
        let out = stationarize(&noise(11, 120)).unwrap();
        assert!(out.record.is_identity());
        assert!(!out.adf.log_transform_applied);
    }

    #[test]
    fn exponential_growth_needs_log_and_one_difference() {
        let e = noise(12, 150);
        let y: Vec<f64> = (0..150)
            .map(|t| (0.03 * t as f64 + 0.05 * e[t]).exp())
            .collect();
        let out = stationarize(&y).unwrap();
        assert!(out.record.log_applied);
        assert_eq!(out.record.differences, vec![1]);
        assert!(out.adf.log_transform_applied);
        let back = out.record.invert(&out.series);
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).abs() <= 1e-9 * b.abs());
        }
    }

    #[test]
    fn output_is_idempotent() {
        let mut level = 5.0;
        let walk: Vec<f64> = noise(13, 200)
            .into_iter()
            .map(|e| {
                level += e;
                level
            })
            .collect();
        let first = stationarize(&walk).unwrap();
        let second = stationarize(&first.series).unwrap();
        assert!(second.record.is_identity());
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            stationarize(&[1.0; 10]),
            Err(DiagnosticsError::TooShort { .. })
        ));
    }
}
