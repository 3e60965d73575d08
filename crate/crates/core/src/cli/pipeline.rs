use chrono::NaiveDate;

use crate::aggregate::{build_series, normalize_by_area};
use crate::diagnostics::{self, DiagnosticsError, TransformRecord};
use crate::lexicon::label_corpus;
use crate::sarima::{self, Forecast};

use super::commands::{
    data, ingest_config, labelled_csv, leaderboard_csv, load_areas, load_lexicon, preprocessor,
    records_csv, run_ingest, select_model, series_csv, series_key, StationarizeReport,
};
use super::formats::{forecast_csv, ModelFile};
use super::io::Outputs;
use super::{CliError, PipelineArgs};

fn stage<T>(name: &'static str, r: Result<T, CliError>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Stage {
        stage: name,
        source: Box::new(e),
    })
}

fn head(f: &Forecast, n: usize) -> Forecast {
    Forecast {
        horizon: n,
        point: f.point[..n].to_vec(),
        se: f.se[..n].to_vec(),
        lower: f.lower[..n].to_vec(),
        upper: f.upper[..n].to_vec(),
        level: f.level,
    }
}

/// ingest, label, series (+ normalize), stationarize the training part,
/// split, grid search, forecast over the test span and evaluate. Outputs
/// stay `.partial` unless every stage succeeds.
pub fn run(args: &PipelineArgs) -> Result<(), CliError> {
    let config = ingest_config(args.date_from, args.date_to, args.columns_map.as_deref())?;
    let kind = preprocessor(&args.preprocessor)?;
    let key = series_key(args.region_level, &args.region, &args.pest)?;
    if let Some(name) = &args.selection.grid {
        super::commands::grid_preset(name)?;
    }
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Validation(format!(
            "--level must be in (0, 1), got {}",
            args.level
        )));
    }
    let mut out = Outputs::new(&args.common.out_dir)?;

    let (records, report) = stage(
        "ingest",
        out.input("input", &args.input)
            .and_then(|bytes| run_ingest(&bytes, &config, kind)),
    )?;
    out.stage("records.csv", &records_csv(&records))?;
    out.stage_json("ingest_report.json", &report)?;

    let lexicon = stage("label", load_lexicon(&mut out, args.lexicon.as_deref()))?;
    let (labelled, stats) = label_corpus(&records, &lexicon);
    out.stage("labelled.csv", &labelled_csv(&labelled))?;
    out.stage_json("label_stats.json", &stats)?;

    let series = stage("series", {
        let series = build_series(&labelled, &key, args.bin, &config.window);
        if series.total() == 0.0 {
            Err(CliError::Data(format!(
                "empty series: no `{}` queries",
                key.pest
            )))
        } else {
            match &args.areas {
                Some(path) => load_areas(&mut out, path)
                    .and_then(|areas| normalize_by_area(&series, &areas).map_err(data)),
                None => Ok(series),
            }
        }
    })?;
    out.stage("series.csv", &series_csv(&series))?;

    let (train, test) = stage(
        "split",
        sarima::train_test_split(&series.values, args.train_fraction)
            .map_err(|e| CliError::Validation(e.to_string())),
    )?;

    let stationary = stage(
        "stationarize",
        match diagnostics::stationarize(train) {
            Ok(s) => Ok((s, true)),
            Err(DiagnosticsError::NotStationary(last)) => {
                log::warn!("training series still has a unit root after differencing");
                Ok((*last, false))
            }
            Err(e) => Err(data(e)),
        },
    )?;
    let (stationary, stationary_ok) = stationary;
    out.stage_json(
        "adf.json",
        &StationarizeReport {
            stationary: stationary_ok,
            record: &stationary.record,
            adf: &stationary.adf,
        },
    )?;

    // differencing moves into the model order; only the log stays outside
    let transform = TransformRecord {
        log_applied: stationary.record.log_applied,
        ..TransformRecord::identity()
    };
    let history = if transform.log_applied {
        diagnostics::log_transform(train).map_err(data)?
    } else {
        train.to_vec()
    };
    let d = stationary.record.differences.len();
    let (model, outcome) = stage("fit", select_model(&history, &args.selection, Some(d)))?;
    if let Some(outcome) = &outcome {
        out.stage("leaderboard.csv", &leaderboard_csv(outcome))?;
        out.stage_json("fit_failures.json", &outcome.failures)?;
    }

    let steps = test.len().max(args.horizon.unwrap_or(0));
    let mut forecast = stage(
        "forecast",
        sarima::forecast(&model, &history, steps, args.level).map_err(data),
    )?;
    if transform.log_applied {
        forecast = forecast.expm1();
    }
    let dates: Vec<Option<NaiveDate>> = (0..steps)
        .map(|j| Some(series.date_at(train.len() + j)))
        .collect();
    out.stage("forecast.csv", &forecast_csv(&forecast, &dates))?;

    let metrics = stage(
        "evaluate",
        sarima::evaluate(&head(&forecast, test.len()), test).map_err(data),
    )?;
    out.stage_json("metrics.json", &metrics)?;
    println!(
        "pipeline: {} labelled, model {} (aic {:.3}), test rmse {:.4}, coverage {:.3}",
        stats.labelled, model.order, model.aic, metrics.rmse, metrics.ci_coverage
    );
    out.stage_json("model.json", &ModelFile { model, transform })?;
    out.commit("pipeline", args.common.seed, args)
}
