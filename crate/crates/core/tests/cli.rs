use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pestpulse::ingest::write_records;
use pestpulse::synthetic::{corpus, CorpusSpec};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn pestpulse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pestpulse"))
        .args(args)
        .env_remove("PESTPULSE_THREADS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = pestpulse(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = pestpulse(&["adf", "--input", "x.csv", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = pestpulse(&[
        "adf",
        "--input",
        "/nonexistent/series.csv",
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn random_walk_has_a_unit_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = pestpulse(&[
        "adf",
        "--input",
        p(&data("random_walk.csv")),
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let adf = json(&dir.path().join("adf.json"));
    assert_eq!(adf["stationary_at_5pct"], false);
    assert!(dir.path().join("adf.manifest.json").exists());
}

#[test]
fn staged_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let mut all = args.to_vec();
        all.extend(["--out-dir", p(d)]);
        let out = pestpulse(&all);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["ingest", "--input", p(&data("kcc.csv"))]);
    run(&["label", "--input", p(&d.join("records.csv"))]);
    run(&[
        "series",
        "--input",
        p(&d.join("labelled.csv")),
        "--pest",
        "aphid",
        "--normalize",
        "--areas",
        p(&data("gca.csv")),
    ]);
    run(&[
        "map",
        "--input",
        p(&d.join("labelled.csv")),
        "--pest",
        "aphid",
        "--from",
        "2015-01-01",
        "--to",
        "2015-12-31",
        "--areas",
        p(&data("gca.csv")),
    ]);
    run(&["acf", "--input", p(&d.join("series.csv"))]);
    run(&["stationarize", "--input", p(&d.join("series.csv"))]);
    run(&[
        "fit",
        "--input",
        p(&d.join("series.csv")),
        "--order",
        "1,0,0,1,0,0,12",
        "--log",
    ]);
    run(&[
        "forecast",
        "--model",
        p(&d.join("model.json")),
        "--input",
        p(&d.join("series.csv")),
        "--horizon",
        "6",
    ]);

    let report = json(&d.join("ingest_report.json"));
    assert_eq!(report["accepted"], 5000);
    let seasons = json(&d.join("seasons.json"));
    assert!(seasons.to_string().contains("12"), "{seasons}");
    let forecast = std::fs::read_to_string(d.join("forecast.csv")).unwrap();
    assert_eq!(forecast.lines().count(), 7);
    assert!(forecast
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("1,2021-01-01,"));
    let choropleth = std::fs::read_to_string(d.join("choropleth.csv")).unwrap();
    assert_eq!(choropleth.lines().count(), 4);

    // a forecast scored against itself
    let actual: String = std::iter::once("index,value".to_string())
        .chain(
            forecast
                .lines()
                .skip(1)
                .enumerate()
                .map(|(i, l)| format!("{i},{}", l.split(',').nth(2).unwrap())),
        )
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(d.join("actual.csv"), actual).unwrap();
    run(&[
        "eval",
        "--forecast",
        p(&d.join("forecast.csv")),
        "--actual",
        p(&d.join("actual.csv")),
    ]);
    let metrics = json(&d.join("metrics.json"));
    assert_eq!(metrics["rmse"], 0.0);
    assert_eq!(metrics["ci_coverage"], 1.0);
    for sub in [
        "ingest",
        "label",
        "series",
        "map",
        "acf",
        "stationarize",
        "fit",
        "forecast",
        "eval",
    ] {
        assert!(d.join(format!("{sub}.manifest.json")).exists(), "{sub}");
    }
}

#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path| {
        let o = pestpulse(&[
            "pipeline",
            "--input",
            p(&data("kcc.csv")),
            "--pest",
            "aphid",
            "--grid",
            "small",
            "--seed",
            "3",
            "--threads",
            "2",
            "--out-dir",
            p(out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read(out.join("pipeline.manifest.json")).unwrap()
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a, b);
    let manifest: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert!(manifest["outputs"]["metrics.json"].is_string());
}

#[test]
fn pipeline_without_pest_queries_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CorpusSpec {
        rows: 500,
        pest_share: 0.0,
        ..CorpusSpec::default()
    };
    let kcc = dir.path().join("kcc.csv");
    write_records(std::fs::File::create(&kcc).unwrap(), &corpus(&spec)).unwrap();
    let out_dir = dir.path().join("out");
    let out = pestpulse(&[
        "pipeline",
        "--input",
        p(&kcc),
        "--pest",
        "aphid",
        "--out-dir",
        p(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty series"));
    assert!(!out_dir.join("pipeline.manifest.json").exists());
    assert!(!out_dir.join("records.csv").exists());
    assert!(out_dir.join("records.csv.partial").exists());
}

#[test]
fn bad_order_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = pestpulse(&[
        "fit",
        "--input",
        p(&data("random_walk.csv")),
        "--order",
        "1,0",
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
