use chrono::NaiveDate;
use proptest::prelude::*;

use pestpulse::aggregate::{build_series, monthly_profile, normalize_by_area, PestSelector};
use pestpulse::diagnostics::{acf, adf_test, difference, rolling_stats, LagPolicy};
use pestpulse::ingest::{default_headers, normalize_text, parse_records, DateWindow, IngestConfig};
use pestpulse::lexicon::{label_query, match_distance, PestLexicon, Source};
use pestpulse::sarima::polynomial::{is_invertible, is_stationary};
use pestpulse::sarima::{
    evaluate, fit, forecast, normal_quantile, simulate, train_test_split, Coefficients,
    OptimizerConfig, SarimaOrder,
};
use pestpulse::synthetic::{area_table, corpus, random_walk, CorpusSpec};
use pestpulse::{Bin, RegionLevel, SeriesKey};

fn small_word() -> impl Strategy<Value = String> {
    "[a-dA-D]{0,8}"
}

fn arma_coefficients() -> impl Strategy<Value = (usize, usize, Coefficients)> {
    (0usize..=2, 0usize..=2, -0.8f64..0.8, -0.8f64..0.8).prop_map(|(p, q, a, m)| {
        // coefficient magnitudes summing below 1 keep every draw stationary
        // and invertible
        let coefs = Coefficients {
            ar: (0..p).map(|i| (0.6 * a).powi(i as i32 + 1)).collect(),
            ma: (0..q).map(|i| (0.6 * m).powi(i as i32 + 1)).collect(),
            ..Default::default()
        };
        (p, q, coefs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ingest_report_balances(rows in prop::collection::vec((0u8..5, 1u32..28), 0..60)) {
        let mut csv = default_headers().join(",");
        csv.push('\n');
        for (kind, day) in &rows {
            let (state, ts) = match kind {
                0 => ("", format!("2016-03-{day:02} 10:00:00.000")),
                1 => ("PUNJAB", "not a date".to_string()),
                2 => ("PUNJAB", format!("2030-03-{day:02} 10:00:00.000")),
                _ => ("PUNJAB", format!("2016-03-{day:02} 10:00:00.000")),
            };
            csv.push_str(&format!(
                "Rabi,AGRICULTURE,Cereals,Wheat,General,q,a,{state},LUDHIANA,B,{ts}\n"
            ));
        }
        let (records, report) = parse_records(csv.as_bytes(), &IngestConfig::default()).unwrap();
        prop_assert!(report.is_balanced());
        prop_assert_eq!(report.total_rows, rows.len());
        prop_assert_eq!(records.len(), rows.iter().filter(|(k, _)| *k >= 3).count());
        prop_assert!(records.iter().all(|r| !r.state.is_empty() && !r.district.is_empty()));
    }

    #[test]
    fn normalizer_is_idempotent(text in "[ -~]{0,40}") {
        let once = normalize_text(&text);
        prop_assert_eq!(normalize_text(&once), once.clone());
        prop_assert!(!once.contains("  "));
    }

    #[test]
    fn match_distance_is_symmetric_and_case_blind(a in small_word(), b in small_word()) {
        let d = match_distance(&a, &b);
        prop_assert_eq!(d, match_distance(&b, &a));
        prop_assert_eq!(d, match_distance(&a.to_uppercase(), &b.to_lowercase()));
        prop_assert!(d.is_none_or(|d| d <= 1));
        prop_assert_eq!(match_distance(&a, &a), Some(0));
    }

    #[test]
    fn labels_quote_their_source(words in prop::collection::vec("[a-z]{1,9}", 0..8), seed in 0u64..1000) {
        let lexicon = PestLexicon::reference();
        let mut rec = corpus(&CorpusSpec { rows: 1, pest_share: 0.0, seed, ..CorpusSpec::default() })
            .pop()
            .unwrap();
        rec.query_text = words.join(" ");
        if let Some(label) = label_query(&rec, &lexicon) {
            prop_assert!(label.distance <= 1);
            let field = match label.source {
                Source::Question => &rec.query_text,
                Source::Answer => &rec.answer_text,
            };
            prop_assert!(field.contains(&label.matched_text));
            prop_assert!(lexicon.contains_id(&label.pest_id));
        }
    }

    #[test]
    fn acf_is_bounded(values in prop::collection::vec(-100.0f64..100.0, 12..80)) {
        prop_assume!(values.iter().any(|v| (v - values[0]).abs() > 1e-6));
        let r = acf(&values, values.len() / 2).unwrap();
        prop_assert!((r[0] - 1.0).abs() < 1e-12);
        prop_assert!(r.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn difference_and_rolling_lengths(values in prop::collection::vec(-1e3f64..1e3, 1..60), n in 1usize..5, w in 1usize..10) {
        if let Ok(out) = difference(&values, n) {
            prop_assert_eq!(out.len(), values.len() - n);
            for (t, v) in out.iter().enumerate() {
                prop_assert_eq!(*v, values[t + n] - values[t]);
            }
        }
        if let Ok((mean, sd)) = rolling_stats(&values, w) {
            prop_assert_eq!(mean.len(), values.len() - w + 1);
            prop_assert!(sd.iter().all(|s| *s >= 0.0));
        }
    }

    #[test]
    fn adf_decision_matches_statistic(seed in any::<u64>(), phi in 0.0f64..1.0) {
        let walk = random_walk(150, seed);
        let values: Vec<f64> = walk.windows(2).map(|w| w[1] - (1.0 - phi) * w[0]).collect();
        let r = adf_test(&values, LagPolicy::default()).unwrap();
        let cv = r.critical_values;
        prop_assert!(cv.one < cv.five && cv.five < cv.ten);
        prop_assert_eq!(r.stationary_at_5pct, r.statistic < cv.five);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn split_is_chronological(n in 2usize..200, f in 0.05f64..0.95) {
        let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
        if let Ok((train, test)) = train_test_split(&y, f) {
            prop_assert_eq!(train.len(), (n as f64 * f + 1e-9).floor() as usize);
            prop_assert_eq!([train, test].concat(), y);
        }
    }

    #[test]
    fn evaluate_perfect_forecast(seed in 0u64..500, h in 1usize..24) {
        let y = simulate(&SarimaOrder::arma(1, 0), &Coefficients { ar: vec![0.4], ..Default::default() }, 1.0, 120, seed).unwrap();
        let m = fit(&y, &SarimaOrder::arma(1, 0), &OptimizerConfig::default()).unwrap();
        let f = forecast(&m, &y, h, 0.9).unwrap();
        let metrics = evaluate(&f, &f.point).unwrap();
        prop_assert_eq!(metrics.rmse, 0.0);
        prop_assert_eq!(metrics.ci_coverage, 1.0);
        prop_assert!((metrics.mse - metrics.rmse.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn series_has_no_gaps(seed in 0u64..1000, rows in 50usize..400) {
        let spec = CorpusSpec { rows, months: 24, seed, ..CorpusSpec::default() };
        let records = corpus(&spec);
        let lexicon = PestLexicon::reference();
        let labelled: Vec<_> = records
            .iter()
            .filter_map(|r| label_query(r, &lexicon).map(|l| (r.clone(), l)))
            .collect();
        let window = DateWindow::new(spec.start, NaiveDate::from_ymd_opt(2016, 12, 31).unwrap()).unwrap();
        let key = SeriesKey::new(RegionLevel::State, "PUNJAB", PestSelector::All).unwrap();
        let series = build_series(&labelled, &key, Bin::Monthly, &window);
        prop_assert_eq!(series.len(), 24);
        let punjab = labelled.iter().filter(|(r, _)| r.state == "PUNJAB").count();
        prop_assert_eq!(series.total(), punjab as f64);
        prop_assert!((monthly_profile(&series).total() - series.total()).abs() < 1e-9);

        let areas = area_table(&spec);
        let norm = normalize_by_area(&series, &areas).unwrap();
        let doubled = normalize_by_area(&series.with_values(series.values.iter().map(|v| 2.0 * v).collect()), &areas).unwrap();
        for (a, b) in norm.values.iter().zip(&doubled.values) {
            prop_assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        prop_assert!(norm.values.iter().all(|v| *v >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fitted_models_are_stationary_and_invertible((p, q, coefs) in arma_coefficients(), seed in any::<u64>()) {
        let order = SarimaOrder::arma(p, q);
        let fit_order = SarimaOrder::arma(p.max(1), q);
        let y = simulate(&order, &coefs, 1.0, 200, seed).unwrap();
        let m = fit(&y, &fit_order, &OptimizerConfig::default()).unwrap();
        prop_assert!(is_stationary(&m.ar));
        prop_assert!(is_invertible(&m.ma));
        let k = (fit_order.n_coefficients() + 2) as f64;
        prop_assert!((m.aic - (-2.0 * m.loglik + 2.0 * k)).abs() < 1e-9);
        prop_assert!(m.sigma2 > 0.0);
    }

    #[test]
    fn forecast_intervals_are_consistent((p, q, coefs) in arma_coefficients(), seed in any::<u64>(), level in 0.5f64..0.99) {
        let order = SarimaOrder::arma(p, q);
        let y = simulate(&order, &coefs, 1.0, 150, seed).unwrap();
        let fit_order = SarimaOrder::arma(p.max(1), q);
        let m = fit(&y, &fit_order, &OptimizerConfig::default()).unwrap();
        let f = forecast(&m, &y, 24, level).unwrap();
        let z = normal_quantile((1.0 + level) / 2.0);
        for h in 0..24 {
            prop_assert!(f.lower[h] <= f.point[h] && f.point[h] <= f.upper[h]);
            prop_assert!(((f.upper[h] - f.point[h]) - z * f.se[h]).abs() < 1e-9 * f.se[h].max(1.0));
            if h > 0 {
                prop_assert!(f.se[h] >= f.se[h - 1] - 1e-12);
            }
        }
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let order = SarimaOrder::new((1, 1, 0), (0, 1, 1, 4)).unwrap();
        let coefs = Coefficients { ar: vec![0.3], sma: vec![0.4], ..Default::default() };
        let a = simulate(&order, &coefs, 1.0, 80, seed).unwrap();
        prop_assert_eq!(&a, &simulate(&order, &coefs, 1.0, 80, seed).unwrap());
        prop_assert!(a.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn grid_best_beats_the_mean_forecast_on_seasonal_data() {
    let order = SarimaOrder::new((1, 0, 0), (1, 0, 0, 12)).unwrap();
    let coefs = Coefficients {
        ar: vec![0.3],
        sar: vec![0.8],
        ..Default::default()
    };
    let grid = pestpulse::sarima::GridSpec {
        p: vec![0, 1],
        d: vec![0],
        q: vec![0, 1],
        seasonal_p: vec![0, 1],
        seasonal_d: vec![0],
        seasonal_q: vec![0, 1],
        periods: vec![12],
    };
    for seed in 0..5 {
        let y = simulate(&order, &coefs, 1.0, 240, 900 + seed).unwrap();
        let (train, test) = train_test_split(&y, 0.8).unwrap();
        let out =
            pestpulse::sarima::grid_search(train, &grid, &OptimizerConfig::default()).unwrap();
        let f = forecast(&out.best, train, test.len(), 0.95).unwrap();
        let rmse = evaluate(&f, test).unwrap().rmse;
        let mean = train.iter().sum::<f64>() / train.len() as f64;
        let baseline =
            (test.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / test.len() as f64).sqrt();
        assert!(rmse <= baseline, "seed {seed}: {rmse} > {baseline}");
    }
}

#[test]
fn seasonal_ar_recovery() {
    let order = SarimaOrder::new((1, 0, 0), (1, 0, 0, 12)).unwrap();
    let coefs = Coefficients {
        ar: vec![0.5],
        sar: vec![0.6],
        ..Default::default()
    };
    for seed in 0..20 {
        let y = simulate(&order, &coefs, 1.0, 2000, 1_000 + seed).unwrap();
        let m = fit(&y, &order, &OptimizerConfig::default()).unwrap();
        assert!((m.ar[0] - 0.5).abs() <= 0.1, "seed {seed}: ar {}", m.ar[0]);
        assert!(
            (m.sar[0] - 0.6).abs() <= 0.1,
            "seed {seed}: sar {}",
            m.sar[0]
        );
    }
}

#[test]
fn every_grid_model_has_non_decreasing_se() {
    let order = SarimaOrder::new((1, 0, 1), (1, 0, 0, 6)).unwrap();
    let coefs = Coefficients {
        ar: vec![0.5],
        ma: vec![-0.3],
        sar: vec![0.5],
        ..Default::default()
    };
    let y = simulate(&order, &coefs, 1.0, 180, 77).unwrap();
    let grid = pestpulse::sarima::GridSpec::default().with_periods(vec![6]);
    let out = pestpulse::sarima::grid_search(&y, &grid, &OptimizerConfig::default()).unwrap();
    assert!(out.models.len() > 50);
    for m in &out.models {
        let f = forecast(m, &y, 30, 0.95).unwrap();
        assert!(
            f.se.windows(2).all(|w| w[1] >= w[0] - 1e-12),
            "{}: {:?}",
            m.order,
            f.se
        );
    }
}

#[test]
fn formats_round_trip() {
    use pestpulse::aggregate::{read_series_csv, write_series_csv, AreaTable};
    use pestpulse::ingest::write_records;
    use pestpulse::lexicon::{read_labelled, write_labelled};

    let spec = CorpusSpec {
        rows: 300,
        ..CorpusSpec::default()
    };
    let records = corpus(&spec);
    let mut buf = Vec::new();
    write_records(&mut buf, &records).unwrap();
    let (back, report) = parse_records(buf.as_slice(), &IngestConfig::default()).unwrap();
    assert_eq!(report.accepted, records.len());
    assert_eq!(back, records);

    let lexicon = PestLexicon::reference();
    let text = lexicon.to_json();
    assert_eq!(PestLexicon::from_json(&text).unwrap().to_json(), text);
    let labelled: Vec<_> = records
        .iter()
        .filter_map(|r| label_query(r, &lexicon).map(|l| (r.clone(), l)))
        .collect();
    let mut buf = Vec::new();
    write_labelled(&mut buf, &labelled).unwrap();
    assert_eq!(read_labelled(buf.as_slice()).unwrap(), labelled);

    let series = build_series(
        &labelled,
        &SeriesKey::national(PestSelector::All),
        Bin::Monthly,
        &IngestConfig::default().window,
    );
    let mut buf = Vec::new();
    write_series_csv(&mut buf, &series).unwrap();
    let again = read_series_csv(buf.as_slice()).unwrap();
    assert_eq!(again.values, series.values);
    let mut buf2 = Vec::new();
    write_series_csv(&mut buf2, &again).unwrap();
    assert_eq!(buf, buf2);

    let mut buf = Vec::new();
    area_table(&spec).to_csv(&mut buf).unwrap();
    let mut buf2 = Vec::new();
    AreaTable::from_csv(buf.as_slice())
        .unwrap()
        .to_csv(&mut buf2)
        .unwrap();
    assert_eq!(buf, buf2);

    let y = simulate(
        &SarimaOrder::arma(1, 1),
        &Coefficients {
            ar: vec![0.5],
            ma: vec![0.2],
            ..Default::default()
        },
        1.0,
        200,
        4,
    )
    .unwrap();
    let model = fit(&y, &SarimaOrder::arma(1, 1), &OptimizerConfig::default()).unwrap();
    let json = serde_json::to_string(&model).unwrap();
    let back: pestpulse::SarimaModel = serde_json::from_str(&json).unwrap();
    assert_eq!(back, model);
}
