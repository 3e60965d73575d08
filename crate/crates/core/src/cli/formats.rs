//! CSV and JSON formats owned by the command-line front end.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::aggregate::{read_series_csv, FrequencySeries};
use crate::diagnostics::TransformRecord;
use crate::sarima::{normal_cdf, Forecast, SarimaModel};

use super::CliError;

/// Numeric input: a series CSV, or any CSV with a `value` column.
#[derive(Debug, Clone)]
pub struct Values {
    pub values: Vec<f64>,
    pub series: Option<FrequencySeries>,
}

impl Values {
    pub fn date_after(&self, steps: usize) -> Option<NaiveDate> {
        self.series
            .as_ref()
            .map(|s| s.bin.offset(s.start, s.len() + steps - 1))
    }
}

pub fn parse_values(bytes: &[u8]) -> Result<Values, CliError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(data)?.clone();
    if header.iter().next() == Some("date") && header.iter().any(|h| h == "region_level") {
        let series = read_series_csv(bytes).map_err(data)?;
        return Ok(Values {
            values: series.values.clone(),
            series: Some(series),
        });
    }
    let col = header
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| CliError::Data("input has no `value` column".into()))?;
    let mut values = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(data)?;
        let v: f64 = row
            .get(col)
            .and_then(|s| s.trim().parse().ok())
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| CliError::Data(format!("row {}: bad value", i + 1)))?;
        values.push(v);
    }
    Ok(Values {
        values,
        series: None,
    })
}

pub fn values_csv(values: &[f64]) -> Vec<u8> {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out.into_bytes()
}

pub fn acf_csv(r: &[f64]) -> Vec<u8> {
    let mut out = String::from("lag,r\n");
    for (k, v) in r.iter().enumerate() {
        out.push_str(&format!("{k},{v}\n"));
    }
    out.into_bytes()
}

/// Model file: the fitted model's fields plus the transform applied to the
/// data before fitting. Differencing lives in the model order, so the
/// record only ever carries the log step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub model: SarimaModel,
    pub transform: TransformRecord,
}

const FORECAST_HEADER: &str = "step,date,point,se,lower,upper";

pub fn forecast_csv(forecast: &Forecast, dates: &[Option<NaiveDate>]) -> Vec<u8> {
    let mut out = String::from(FORECAST_HEADER);
    out.push('\n');
    for h in 0..forecast.horizon {
        let date = dates
            .get(h)
            .copied()
            .flatten()
            .map(|d| d.format("%Y-%m-%d").to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            h + 1,
            date,
            forecast.point[h],
            forecast.se[h],
            forecast.lower[h],
            forecast.upper[h]
        ));
    }
    out.into_bytes()
}

/// Read a forecast CSV back. The level is recovered from the interval
/// width of the first step with a positive standard error.
pub fn parse_forecast(bytes: &[u8]) -> Result<Forecast, CliError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(data)?
        .iter()
        .map(String::from)
        .collect();
    if header.join(",") != FORECAST_HEADER {
        return Err(CliError::Data(format!(
            "expected forecast header {FORECAST_HEADER}"
        )));
    }
    let (mut point, mut se, mut lower, mut upper) = (vec![], vec![], vec![], vec![]);
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(data)?;
        let num = |j: usize| -> Result<f64, CliError> {
            row[j]
                .parse()
                .map_err(|_| CliError::Data(format!("row {}: bad number `{}`", i + 1, &row[j])))
        };
        point.push(num(2)?);
        se.push(num(3)?);
        lower.push(num(4)?);
        upper.push(num(5)?);
    }
    let level = se
        .iter()
        .zip(lower.iter().zip(&upper))
        .find(|(s, _)| **s > 0.0)
        .map(|(s, (l, u))| 2.0 * normal_cdf((u - l) / (2.0 * s)) - 1.0)
        .unwrap_or(f64::NAN);
    Ok(Forecast {
        horizon: point.len(),
        point,
        se,
        lower,
        upper,
        level,
    })
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}
