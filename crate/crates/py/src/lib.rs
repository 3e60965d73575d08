//! Python bindings: `import pestpulse`.
//!
//! Results come back as small read-only classes; every error surfaces as
//! `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pestpulse::diagnostics::{self, DiagnosticsError, LagPolicy, TransformRecord};
use pestpulse::ingest::{KccRecord, Season};
use pestpulse::lexicon;
use pestpulse::sarima::{self, Coefficients, GridSpec, OptimizerConfig};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type OrderTuple = (usize, usize, usize);
type SeasonalTuple = (usize, usize, usize, usize);

fn order_from(order: OrderTuple, seasonal: Option<SeasonalTuple>) -> PyResult<sarima::SarimaOrder> {
    sarima::SarimaOrder::new(order, seasonal.unwrap_or((0, 0, 0, 0))).map_err(value_error)
}

#[pyfunction]
fn normalize_text(text: &str) -> String {
    pestpulse::ingest::normalize_text(text)
}

/// Damerau-Levenshtein distance if it is at most 1, else `None`.
#[pyfunction]
fn match_distance(candidate: &str, name: &str) -> Option<u8> {
    lexicon::match_distance(candidate, name)
}

#[pyclass(frozen, get_all, module = "pestpulse")]
struct PestLabel {
    pest_id: String,
    matched_text: String,
    source: String,
    distance: u8,
}

#[pyclass(frozen, module = "pestpulse")]
struct PestLexicon(lexicon::PestLexicon);

#[pymethods]
impl PestLexicon {
    /// The bundled reference lexicon.
    #[staticmethod]
    fn reference() -> Self {
        Self(lexicon::PestLexicon::reference())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        lexicon::PestLexicon::from_json(text)
            .map(Self)
            .map_err(value_error)
    }

    fn ids(&self) -> Vec<String> {
        self.0.entries().iter().map(|e| e.id.clone()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Best match for a question (and optional answer), or `None`.
    #[pyo3(signature = (question, answer = ""))]
    fn label(&self, question: &str, answer: &str) -> Option<PestLabel> {
        let record = KccRecord {
            season: Season::Unknown,
            sector: String::new(),
            category: String::new(),
            crop: String::new(),
            query_type: String::new(),
            query_text: question.to_string(),
            answer_text: answer.to_string(),
            state: String::new(),
            district: String::new(),
            block: String::new(),
            created_on: chrono::NaiveDateTime::default(),
        };
        lexicon::label_query(&record, &self.0).map(|l| PestLabel {
            pest_id: l.pest_id,
            matched_text: l.matched_text,
            source: l.source.to_string(),
            distance: l.distance,
        })
    }
}

#[pyfunction]
fn acf(values: Vec<f64>, max_lag: usize) -> PyResult<Vec<f64>> {
    diagnostics::acf(&values, max_lag).map_err(value_error)
}

#[pyclass(frozen, get_all, module = "pestpulse")]
struct AdfResult {
    statistic: f64,
    p_value: f64,
    lags_used: usize,
    n_obs: usize,
    /// `(1%, 5%, 10%)`.
    critical_values: (f64, f64, f64),
    stationary_at_5pct: bool,
}

impl From<&diagnostics::AdfResult> for AdfResult {
    fn from(r: &diagnostics::AdfResult) -> Self {
        Self {
            statistic: r.statistic,
            p_value: r.p_value,
            lags_used: r.lags_used,
            n_obs: r.n_obs,
            critical_values: (
                r.critical_values.one,
                r.critical_values.five,
                r.critical_values.ten,
            ),
            stationary_at_5pct: r.stationary_at_5pct,
        }
    }
}

/// ADF test with a constant; `lags=None` picks the lag by AIC.
#[pyfunction]
#[pyo3(signature = (values, lags = None))]
fn adf_test(values: Vec<f64>, lags: Option<usize>) -> PyResult<AdfResult> {
    let policy = lags.map_or(LagPolicy::default(), LagPolicy::Fixed);
    diagnostics::adf_test(&values, policy)
        .map(|r| AdfResult::from(&r))
        .map_err(value_error)
}

#[pyclass(frozen, module = "pestpulse")]
struct Stationarized {
    #[pyo3(get)]
    series: Vec<f64>,
    #[pyo3(get)]
    stationary: bool,
    #[pyo3(get)]
    adf: Py<AdfResult>,
    record: TransformRecord,
}

#[pymethods]
impl Stationarized {
    #[getter]
    fn log_applied(&self) -> bool {
        self.record.log_applied
    }

    #[getter]
    fn differences(&self) -> Vec<usize> {
        self.record.differences.clone()
    }

    /// Undo the recorded transforms.
    fn invert(&self, transformed: Vec<f64>) -> Vec<f64> {
        self.record.invert(&transformed)
    }
}

/// Log and difference until the ADF test rejects a unit root. A series
/// that never gets there comes back with `stationary = False`.
#[pyfunction]
fn stationarize(py: Python<'_>, values: Vec<f64>) -> PyResult<Stationarized> {
    let (st, stationary) = match diagnostics::stationarize(&values) {
        Ok(st) => (st, true),
        Err(DiagnosticsError::NotStationary(last)) => (*last, false),
        Err(e) => return Err(value_error(e)),
    };
    Ok(Stationarized {
        adf: Py::new(py, AdfResult::from(&st.adf))?,
        series: st.series,
        stationary,
        record: st.record,
    })
}

#[pyclass(frozen, get_all, module = "pestpulse")]
struct Forecast {
    point: Vec<f64>,
    se: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    level: f64,
}

impl Forecast {
    fn to_core(&self) -> sarima::Forecast {
        sarima::Forecast {
            horizon: self.point.len(),
            point: self.point.clone(),
            se: self.se.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            level: self.level,
        }
    }
}

impl From<sarima::Forecast> for Forecast {
    fn from(f: sarima::Forecast) -> Self {
        Self {
            point: f.point,
            se: f.se,
            lower: f.lower,
            upper: f.upper,
            level: f.level,
        }
    }
}

#[pymethods]
impl Forecast {
    /// Map back from the `ln(1 + y)` scale.
    fn expm1(&self) -> Self {
        self.to_core().expm1().into()
    }
}

#[pyclass(frozen, module = "pestpulse")]
struct SarimaModel(sarima::SarimaModel);

#[pymethods]
impl SarimaModel {
    /// `(p, d, q, P, D, Q, s)`.
    #[getter]
    fn order(&self) -> (usize, usize, usize, usize, usize, usize, usize) {
        let o = &self.0.order;
        (
            o.p,
            o.d,
            o.q,
            o.seasonal_p,
            o.seasonal_d,
            o.seasonal_q,
            o.period,
        )
    }
    #[getter]
    fn ar(&self) -> Vec<f64> {
        self.0.ar.clone()
    }
    #[getter]
    fn ma(&self) -> Vec<f64> {
        self.0.ma.clone()
    }
    #[getter]
    fn sar(&self) -> Vec<f64> {
        self.0.sar.clone()
    }
    #[getter]
    fn sma(&self) -> Vec<f64> {
        self.0.sma.clone()
    }
    #[getter]
    fn intercept(&self) -> f64 {
        self.0.intercept
    }
    #[getter]
    fn sigma2(&self) -> f64 {
        self.0.sigma2
    }
    #[getter]
    fn loglik(&self) -> f64 {
        self.0.loglik
    }
    #[getter]
    fn aic(&self) -> f64 {
        self.0.aic
    }
    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[pyo3(signature = (history, horizon, level = 0.95))]
    fn forecast(&self, history: Vec<f64>, horizon: usize, level: f64) -> PyResult<Forecast> {
        sarima::forecast(&self.0, &history, horizon, level)
            .map(Forecast::from)
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("SarimaModel({}, aic={:.3})", self.0.order, self.0.aic)
    }
}

#[pyfunction]
#[pyo3(signature = (values, order, seasonal = None, max_evals = 4000))]
fn fit(
    values: Vec<f64>,
    order: OrderTuple,
    seasonal: Option<SeasonalTuple>,
    max_evals: usize,
) -> PyResult<SarimaModel> {
    let cfg = OptimizerConfig {
        max_evals,
        ..OptimizerConfig::default()
    };
    sarima::fit(&values, &order_from(order, seasonal)?, &cfg)
        .map(SarimaModel)
        .map_err(value_error)
}

/// Search every order with components in `0..=max_order` (differencing in
/// `0..=max_diff`) and return the best model and the AIC leaderboard.
#[pyfunction]
#[pyo3(signature = (values, periods = vec![12], max_order = 2, max_diff = 1))]
fn grid_search(
    py: Python<'_>,
    values: Vec<f64>,
    periods: Vec<usize>,
    max_order: usize,
    max_diff: usize,
) -> PyResult<(SarimaModel, Vec<(String, f64)>)> {
    let range: Vec<usize> = (0..=max_order).collect();
    let diff: Vec<usize> = (0..=max_diff).collect();
    let grid = GridSpec {
        p: range.clone(),
        d: diff.clone(),
        q: range.clone(),
        seasonal_p: range.clone(),
        seasonal_d: diff,
        seasonal_q: range,
        periods,
    };
    let outcome = py
        .detach(|| sarima::grid_search(&values, &grid, &OptimizerConfig::default()))
        .map_err(value_error)?;
    let board = outcome
        .leaderboard
        .iter()
        .map(|e| (e.order.to_string(), e.aic))
        .collect();
    Ok((SarimaModel(outcome.best), board))
}

#[pyfunction]
#[pyo3(signature = (order, n, seed, seasonal = None, ar = vec![], ma = vec![], sar = vec![], sma = vec![], intercept = 0.0, sigma = 1.0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    order: OrderTuple,
    n: usize,
    seed: u64,
    seasonal: Option<SeasonalTuple>,
    ar: Vec<f64>,
    ma: Vec<f64>,
    sar: Vec<f64>,
    sma: Vec<f64>,
    intercept: f64,
    sigma: f64,
) -> PyResult<Vec<f64>> {
    let coefs = Coefficients {
        ar,
        ma,
        sar,
        sma,
        intercept,
    };
    sarima::simulate(&order_from(order, seasonal)?, &coefs, sigma, n, seed).map_err(value_error)
}

/// `{"rmse", "mse", "mean_se", "ci_coverage"}` of a forecast against actuals.
#[pyfunction]
fn evaluate(
    forecast: &Forecast,
    actual: Vec<f64>,
) -> PyResult<std::collections::BTreeMap<&'static str, f64>> {
    let m = sarima::evaluate(&forecast.to_core(), &actual).map_err(value_error)?;
    Ok([
        ("rmse", m.rmse),
        ("mse", m.mse),
        ("mean_se", m.mean_se),
        ("ci_coverage", m.ci_coverage),
    ]
    .into_iter()
    .collect())
}

#[pymodule]
#[pyo3(name = "pestpulse")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PestLexicon>()?;
    m.add_class::<PestLabel>()?;
    m.add_class::<AdfResult>()?;
    m.add_class::<Stationarized>()?;
    m.add_class::<SarimaModel>()?;
    m.add_class::<Forecast>()?;
    m.add_function(wrap_pyfunction!(normalize_text, m)?)?;
    m.add_function(wrap_pyfunction!(match_distance, m)?)?;
    m.add_function(wrap_pyfunction!(acf, m)?)?;
    m.add_function(wrap_pyfunction!(adf_test, m)?)?;
    m.add_function(wrap_pyfunction!(stationarize, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
