use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::aggregate::{
    build_series, choropleth_export, choropleth_json, monthly_profile, normalize_by_area,
    write_choropleth_csv, write_series_csv, AreaTable, FrequencySeries, PestSelector, SeriesKey,
};
use crate::diagnostics::{self, seasonal_candidates, AdfResult, LagPolicy, TransformRecord};
use crate::ingest::{
    parse_records, preprocess_all, write_records, ColumnMap, DateWindow, IngestConfig,
    IngestReport, KccRecord, PreprocessorKind,
};
use crate::lexicon::{label_corpus, read_labelled, write_labelled, PestLabel, PestLexicon};
use crate::sarima::{self, grid_search, GridOutcome, GridSpec, OptimizerConfig, SarimaModel};

use super::formats::{
    acf_csv, forecast_csv, parse_forecast, parse_values, values_csv, ModelFile, Values,
};
use super::io::Outputs;
use super::{
    AcfArgs, AdfArgs, CliError, EvalArgs, FitArgs, ForecastArgs, IngestArgs, LabelArgs, MapArgs,
    ModelSelection, SeriesArgs, StationarizeArgs,
};

pub(super) fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

pub(super) fn window(
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> Result<DateWindow, CliError> {
    let default = DateWindow::default();
    DateWindow::new(from.unwrap_or(default.from), to.unwrap_or(default.to))
        .map_err(|e| CliError::Validation(e.to_string()))
}

pub(super) fn ingest_config(
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
    columns_map: Option<&str>,
) -> Result<IngestConfig, CliError> {
    let columns = match columns_map {
        Some(spec) => spec
            .parse::<ColumnMap>()
            .map_err(|e| CliError::Validation(e.to_string()))?,
        None => ColumnMap::default(),
    };
    Ok(IngestConfig {
        columns,
        window: window(from, to)?,
    })
}

pub(super) fn preprocessor(name: &str) -> Result<PreprocessorKind, CliError> {
    name.parse().map_err(CliError::Validation)
}

pub(super) fn run_ingest(
    bytes: &[u8],
    config: &IngestConfig,
    kind: PreprocessorKind,
) -> Result<(Vec<KccRecord>, IngestReport), CliError> {
    let (records, mut report) = parse_records(bytes, config).map_err(data)?;
    let records = preprocess_all(&records, kind.build().as_ref(), &mut report);
    Ok((records, report))
}

pub(super) fn records_csv(records: &[KccRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records(&mut buf, records).expect("writing to memory");
    buf
}

pub(super) fn labelled_csv(labelled: &[(KccRecord, PestLabel)]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_labelled(&mut buf, labelled).expect("writing to memory");
    buf
}

pub(super) fn series_csv(series: &FrequencySeries) -> Vec<u8> {
    let mut buf = Vec::new();
    write_series_csv(&mut buf, series).expect("writing to memory");
    buf
}

pub(super) fn load_lexicon(
    out: &mut Outputs,
    path: Option<&Path>,
) -> Result<PestLexicon, CliError> {
    let Some(path) = path else {
        return Ok(PestLexicon::reference());
    };
    let bytes = out.input("lexicon", path)?;
    let text = String::from_utf8(bytes).map_err(data)?;
    let is_tsv = path.extension().is_some_and(|e| e == "tsv");
    if is_tsv {
        PestLexicon::from_tsv(&text)
    } else {
        PestLexicon::from_json(&text)
    }
    .map_err(data)
}

pub(super) fn load_areas(out: &mut Outputs, path: &Path) -> Result<AreaTable, CliError> {
    let bytes = out.input("areas", path)?;
    AreaTable::from_csv(bytes.as_slice()).map_err(data)
}

pub fn ingest(args: &IngestArgs) -> Result<(), CliError> {
    let config = ingest_config(args.date_from, args.date_to, args.columns_map.as_deref())?;
    let kind = preprocessor(&args.preprocessor)?;
    let mut out = Outputs::new(&args.common.out_dir)?;
    let bytes = out.input("input", &args.input)?;
    let (records, report) = run_ingest(&bytes, &config, kind)?;
    out.stage("records.csv", &records_csv(&records))?;
    out.stage_json("ingest_report.json", &report)?;
    println!(
        "ingest: {} rows, {} accepted, {} rejected",
        report.total_rows,
        report.accepted,
        report.rejected()
    );
    out.commit("ingest", args.common.seed, args)
}

/// Records CSV written by `ingest`, read without a date filter.
pub(super) fn read_clean_records(bytes: &[u8]) -> Result<Vec<KccRecord>, CliError> {
    let config = IngestConfig {
        columns: ColumnMap::default(),
        window: DateWindow::new(NaiveDate::MIN, NaiveDate::MAX).expect("ordered window"),
    };
    let (records, report) = parse_records(bytes, &config).map_err(data)?;
    if report.rejected() > 0 {
        return Err(CliError::Data(format!(
            "{} rows of the records file are invalid; run `ingest` first",
            report.rejected()
        )));
    }
    Ok(records)
}

pub fn label(args: &LabelArgs) -> Result<(), CliError> {
    let mut out = Outputs::new(&args.common.out_dir)?;
    let lexicon = load_lexicon(&mut out, args.lexicon.as_deref())?;
    let bytes = out.input("input", &args.input)?;
    let records = read_clean_records(&bytes)?;
    let (labelled, stats) = label_corpus(&records, &lexicon);
    out.stage("labelled.csv", &labelled_csv(&labelled))?;
    out.stage_json("label_stats.json", &stats)?;
    println!(
        "label: {} of {} queries labelled ({:.2}%)",
        stats.labelled,
        stats.total,
        100.0 * stats.fraction
    );
    out.commit("label", args.common.seed, args)
}

pub(super) fn series_key(
    level: crate::aggregate::RegionLevel,
    region: &str,
    pest: &str,
) -> Result<SeriesKey, CliError> {
    let pest: PestSelector = pest.parse().expect("infallible");
    SeriesKey::new(level, &crate::ingest::canonical_region(region), pest)
        .map_err(|e| CliError::Validation(e.to_string()))
}

pub fn series(args: &SeriesArgs) -> Result<(), CliError> {
    let key = series_key(args.region_level, &args.region, &args.pest)?;
    let window = window(args.date_from, args.date_to)?;
    if args.normalize && args.areas.is_none() {
        return Err(CliError::Validation("--normalize needs --areas".into()));
    }
    let mut out = Outputs::new(&args.common.out_dir)?;
    let bytes = out.input("input", &args.input)?;
    let labelled = read_labelled(bytes.as_slice()).map_err(data)?;
    let mut series = build_series(&labelled, &key, args.bin, &window);
    if args.normalize {
        let areas = load_areas(&mut out, args.areas.as_deref().expect("checked"))?;
        series = normalize_by_area(&series, &areas).map_err(data)?;
    }
    out.stage("series.csv", &series_csv(&series))?;
    out.stage_json("profile.json", &monthly_profile(&series).0)?;
    println!("series: {} bins, total {}", series.len(), series.total());
    out.commit("series", args.common.seed, args)
}

pub fn map(args: &MapArgs) -> Result<(), CliError> {
    let period =
        DateWindow::new(args.from, args.to).map_err(|e| CliError::Validation(e.to_string()))?;
    let pest: PestSelector = args.pest.parse().expect("infallible");
    let mut out = Outputs::new(&args.common.out_dir)?;
    let bytes = out.input("input", &args.input)?;
    let labelled = read_labelled(bytes.as_slice()).map_err(data)?;
    let areas = load_areas(&mut out, &args.areas)?;
    let rows =
        choropleth_export(&labelled, &pest, &period, args.region_level, &areas).map_err(data)?;
    let mut buf = Vec::new();
    write_choropleth_csv(&mut buf, &rows).map_err(data)?;
    out.stage("choropleth.csv", &buf)?;
    out.stage_json("choropleth.json", &choropleth_json(&rows))?;
    println!("map: {} regions", rows.len());
    out.commit("map", args.common.seed, args)
}

pub(super) fn load_values(out: &mut Outputs, label: &str, path: &Path) -> Result<Values, CliError> {
    let bytes = out.input(label, path)?;
    parse_values(&bytes)
}

/// `min(40, n / 3)`: longer lags rest on too few pairs to be trusted.
pub(super) fn default_acf_lag(n: usize) -> usize {
    (n / 3).clamp(1, 40)
}

#[derive(Serialize)]
struct SeasonReport {
    max_lag: usize,
    band: f64,
    candidates: Vec<usize>,
}

pub fn acf(args: &AcfArgs) -> Result<(), CliError> {
    let mut out = Outputs::new(&args.common.out_dir)?;
    let values = load_values(&mut out, "input", &args.input)?.values;
    let max_lag = args
        .max_lag
        .unwrap_or_else(|| default_acf_lag(values.len()));
    let r = diagnostics::acf(&values, max_lag).map_err(data)?;
    let candidates = seasonal_candidates(&values, max_lag, 3).map_err(data)?;
    out.stage("acf.csv", &acf_csv(&r))?;
    out.stage_json(
        "seasons.json",
        &SeasonReport {
            max_lag,
            band: 2.0 / (values.len() as f64).sqrt(),
            candidates: candidates.clone(),
        },
    )?;
    println!("acf: seasonal candidates {candidates:?}");
    out.commit("acf", args.common.seed, args)
}

fn lag_policy(raw: &str) -> Result<LagPolicy, CliError> {
    if raw == "auto" {
        return Ok(LagPolicy::AicAuto(None));
    }
    raw.parse().map(LagPolicy::Fixed).map_err(|_| {
        CliError::Validation(format!("--lags must be `auto` or an integer, got `{raw}`"))
    })
}

pub fn adf(args: &AdfArgs) -> Result<(), CliError> {
    let policy = lag_policy(&args.lags)?;
    let mut out = Outputs::new(&args.common.out_dir)?;
    let values = load_values(&mut out, "input", &args.input)?.values;
    let result = diagnostics::adf_test(&values, policy).map_err(data)?;
    out.stage_json("adf.json", &result)?;
    println!(
        "adf: statistic {:.4}, p-value {:.4}, stationary_at_5pct={}",
        result.statistic, result.p_value, result.stationary_at_5pct
    );
    out.commit("adf", args.common.seed, args)
}

#[derive(Debug, Serialize)]
pub(super) struct StationarizeReport<'a> {
    pub stationary: bool,
    pub record: &'a TransformRecord,
    pub adf: &'a AdfResult,
}

pub fn stationarize(args: &StationarizeArgs) -> Result<(), CliError> {
    let mut out = Outputs::new(&args.common.out_dir)?;
    let values = load_values(&mut out, "input", &args.input)?.values;
    let result = diagnostics::stationarize(&values).map_err(data)?;
    out.stage("stationary.csv", &values_csv(&result.series))?;
    out.stage_json(
        "stationarize.json",
        &StationarizeReport {
            stationary: true,
            record: &result.record,
            adf: &result.adf,
        },
    )?;
    println!(
        "stationarize: log={}, differences={:?}",
        result.record.log_applied, result.record.differences
    );
    out.commit("stationarize", args.common.seed, args)
}

pub(super) fn grid_preset(name: &str) -> Result<GridSpec, CliError> {
    match name {
        "default" => Ok(GridSpec::default()),
        "small" => Ok(GridSpec {
            p: vec![0, 1],
            q: vec![0, 1],
            seasonal_p: vec![0, 1],
            seasonal_q: vec![0, 1],
            ..GridSpec::default()
        }),
        other => Err(CliError::Validation(format!(
            "unknown grid `{other}` (expected default|small)"
        ))),
    }
}

/// Seasonal periods for a grid: the explicit list, else the ACF peaks of
/// `stationary` (the series after any differencing).
pub(super) fn seasons(
    selection: &ModelSelection,
    stationary: &[f64],
) -> Result<Vec<usize>, CliError> {
    if let Some(s) = &selection.seasons {
        if s.iter().any(|&p| p < 2) {
            return Err(CliError::Validation(
                "seasonal periods must be at least 2".into(),
            ));
        }
        return Ok(s.clone());
    }
    let max_lag = default_acf_lag(stationary.len());
    seasonal_candidates(stationary, max_lag, 3).map_err(data)
}

/// Fit the selected order, or search the grid. `fixed_d` pins first
/// differencing when a transform record already chose it; seasonal
/// differencing stays in the search since the record only tests lag 1.
pub(super) fn select_model(
    values: &[f64],
    selection: &ModelSelection,
    fixed_d: Option<usize>,
) -> Result<(SarimaModel, Option<GridOutcome>), CliError> {
    let config = OptimizerConfig {
        max_evals: selection.max_evals,
        ..OptimizerConfig::default()
    };
    if let Some(order) = &selection.order {
        let model = sarima::fit(values, order, &config).map_err(data)?;
        return Ok((model, None));
    }
    let preset = selection.grid.as_deref().unwrap_or("default");
    let mut grid = grid_preset(preset)?;
    if let Some(d) = fixed_d {
        grid.d = vec![d];
    }
    let mut stationary = values.to_vec();
    for _ in 0..fixed_d.unwrap_or(0) {
        stationary = stationary.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let periods = seasons(selection, &stationary)?;
    grid = if periods.is_empty() {
        log::warn!("no seasonal period found; searching non-seasonal orders only");
        GridSpec {
            seasonal_p: vec![0],
            seasonal_d: vec![0],
            seasonal_q: vec![0],
            periods: vec![2],
            ..grid
        }
    } else {
        grid.with_periods(periods)
    };
    let outcome = grid_search(values, &grid, &config).map_err(data)?;
    Ok((outcome.best.clone(), Some(outcome)))
}

pub(super) fn leaderboard_csv(outcome: &GridOutcome) -> Vec<u8> {
    let mut s = String::from("rank,order,aic\n");
    for (i, e) in outcome.leaderboard.iter().enumerate() {
        s.push_str(&format!("{},{},{}\n", i + 1, e.order, e.aic));
    }
    s.into_bytes()
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    if args.selection.order.is_none() && args.selection.grid.is_none() {
        return Err(CliError::Validation("give --order or --grid".into()));
    }
    let mut out = Outputs::new(&args.common.out_dir)?;
    let values = load_values(&mut out, "input", &args.input)?.values;
    let mut transform = TransformRecord::identity();
    let values = if args.log {
        transform.apply_log(&values).map_err(data)?
    } else {
        values
    };
    let (model, outcome) = select_model(&values, &args.selection, None)?;
    if let Some(outcome) = &outcome {
        out.stage("leaderboard.csv", &leaderboard_csv(outcome))?;
        out.stage_json("fit_failures.json", &outcome.failures)?;
    }
    println!(
        "fit: {} aic {:.3} converged={}",
        model.order, model.aic, model.converged
    );
    out.stage_json("model.json", &ModelFile { model, transform })?;
    out.commit("fit", args.common.seed, args)
}

pub fn forecast(args: &ForecastArgs) -> Result<(), CliError> {
    let mut out = Outputs::new(&args.common.out_dir)?;
    let model_bytes = out.input("model", &args.model)?;
    let file: ModelFile = serde_json::from_slice(&model_bytes).map_err(data)?;
    if !file.transform.differences.is_empty() {
        return Err(CliError::Data(
            "model transform must not difference; put differencing in the order".into(),
        ));
    }
    let history = load_values(&mut out, "input", &args.input)?;
    let values = if file.transform.log_applied {
        diagnostics::log_transform(&history.values).map_err(data)?
    } else {
        history.values.clone()
    };
    let mut f = sarima::forecast(&file.model, &values, args.horizon, args.level)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if file.transform.log_applied {
        f = f.expm1();
    }
    let dates: Vec<Option<NaiveDate>> = (1..=args.horizon).map(|h| history.date_after(h)).collect();
    out.stage("forecast.csv", &forecast_csv(&f, &dates))?;
    println!("forecast: {} steps", f.horizon);
    out.commit("forecast", args.common.seed, args)
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let mut out = Outputs::new(&args.common.out_dir)?;
    let forecast = parse_forecast(&out.input("forecast", &args.forecast)?)?;
    let actual = load_values(&mut out, "actual", &args.actual)?.values;
    let metrics = sarima::evaluate(&forecast, &actual).map_err(data)?;
    out.stage_json("metrics.json", &metrics)?;
    println!(
        "eval: rmse {:.4}, mean se {:.4}, coverage {:.3}",
        metrics.rmse, metrics.mean_se, metrics.ci_coverage
    );
    out.commit("eval", args.common.seed, args)
}
