//! Seeded synthetic corpora with a planted seasonal pest signal.
//!
//! The bundled sample data and several tests are generated here; nothing in
//! the analysis path depends on this module.

use chrono::{Datelike, Months, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::aggregate::AreaTable;
use crate::ingest::{KccRecord, Season};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub rows: usize,
    pub start: NaiveDate,
    pub months: usize,
    /// Expected fraction of rows mentioning the planted pest.
    pub pest_share: f64,
    /// Name or alias written into planted questions.
    pub pest: String,
    /// Concentration of the yearly peak; 0 gives a flat profile.
    pub concentration: f64,
    /// Month of peak intensity, 1-based.
    pub peak_month: u32,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            rows: 5000,
            start: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            months: 72,
            pest_share: 0.4,
            pest: "aphid".into(),
            concentration: 2.0,
            peak_month: 3,
            seed: 0,
        }
    }
}

const REGIONS: [(&str, [&str; 2]); 3] = [
    ("PUNJAB", ["LUDHIANA", "BATHINDA"]),
    ("HARYANA", ["HISAR", "SIRSA"]),
    ("UTTAR PRADESH", ["AGRA", "MEERUT"]),
];
const CROPS: [&str; 5] = ["Wheat", "Mustard", "Cotton", "Paddy", "Potato"];
const OTHER_QUESTIONS: [&str; 8] = [
    "weather forecast for next week",
    "market rate of {crop}",
    "fertilizer dose for {crop}",
    "pm kisan scheme status",
    "seed variety for {crop}",
    "subsidy on drip irrigation",
    "soil testing lab address",
    "loan waiver information",
];
const PEST_QUESTIONS: [&str; 4] = [
    "{pest} attack in {crop}",
    "how to control {pest} in {crop}",
    "{pest} infestation on {crop} leaves",
    "spray for {pest} in {crop}",
];

fn season_of(month: u32) -> Season {
    match month {
        6..=10 => Season::Kharif,
        4 | 5 => Season::Zaid,
        _ => Season::Rabi,
    }
}

/// Per-month pest intensity weights `exp(k cos(2 pi (m - peak) / 12))`, a
/// peaked season rather than a single harmonic.
pub fn seasonal_weights(spec: &CorpusSpec) -> Vec<f64> {
    (0..spec.months)
        .map(|i| {
            let month = spec.start.month0() as usize + i;
            let phase = (month % 12) as f64 - (spec.peak_month as f64 - 1.0);
            (spec.concentration * (2.0 * std::f64::consts::PI * phase / 12.0).cos()).exp()
        })
        .collect()
}

/// Generate a query dump; rows are sorted by timestamp.
///
/// Planted pest rows per month are Poisson with mean proportional to
/// [`seasonal_weights`]; the remaining rows are spread evenly over months.
pub fn corpus(spec: &CorpusSpec) -> Vec<KccRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = seasonal_weights(spec);
    let total_weight: f64 = weights.iter().sum();
    let expected_pest = spec.rows as f64 * spec.pest_share;

    let mut per_month: Vec<usize> = weights
        .iter()
        .map(|w| {
            let mean = expected_pest * w / total_weight;
            if mean > 0.0 {
                Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
            } else {
                0
            }
        })
        .collect();
    let pest_rows: usize = per_month.iter().sum::<usize>().min(spec.rows);
    let mut remaining = pest_rows;
    for c in per_month.iter_mut() {
        *c = (*c).min(remaining);
        remaining -= *c;
    }

    let mut records = Vec::with_capacity(spec.rows);
    for (i, &count) in per_month.iter().enumerate() {
        for _ in 0..count {
            records.push(record(spec, i, true, &mut rng));
        }
    }
    for _ in pest_rows..spec.rows {
        let i = rng.random_range(0..spec.months);
        records.push(record(spec, i, false, &mut rng));
    }
    records.sort_by(|a, b| a.created_on.cmp(&b.created_on));
    records
}

fn record(spec: &CorpusSpec, month_index: usize, pest: bool, rng: &mut ChaCha8Rng) -> KccRecord {
    let first = spec.start.with_day(1).expect("valid date") + Months::new(month_index as u32);
    let days = (first + Months::new(1) - first).num_days() as u32;
    let date = first
        .with_day(rng.random_range(1..=days))
        .expect("valid day");
    let ts = date
        .and_hms_milli_opt(
            rng.random_range(6..20),
            rng.random_range(0..60),
            rng.random_range(0..60),
            rng.random_range(0..1000),
        )
        .expect("valid time");
    let (state, districts) = REGIONS.choose(rng).expect("non-empty");
    let district = districts.choose(rng).expect("non-empty");
    let crop = CROPS.choose(rng).expect("non-empty");
    let (query_type, question, answer) = if pest {
        let template = PEST_QUESTIONS.choose(rng).expect("non-empty");
        (
            "Plant Protection",
            template
                .replace("{pest}", &spec.pest)
                .replace("{crop}", crop),
            "spray imidacloprid 17.8 sl at 0.3 ml per litre".to_string(),
        )
    } else {
        let template = OTHER_QUESTIONS.choose(rng).expect("non-empty");
        (
            "General",
            template.replace("{crop}", crop),
            "information provided to the farmer".to_string(),
        )
    };
    KccRecord {
        season: season_of(date.month()),
        sector: "AGRICULTURE".into(),
        category: "Cereals".into(),
        crop: (*crop).into(),
        query_type: query_type.into(),
        query_text: question,
        answer_text: answer,
        state: (*state).into(),
        district: (*district).into(),
        block: format!("{district} BLOCK"),
        created_on: ts,
    }
}

/// Gross cropped area for every generated district and year.
pub fn area_table(spec: &CorpusSpec) -> AreaTable {
    let mut table = AreaTable::new();
    let end = spec.start + Months::new(spec.months as u32);
    for (si, (state, districts)) in REGIONS.iter().enumerate() {
        for (di, district) in districts.iter().enumerate() {
            for year in spec.start.year()..=end.year() {
                let ha = 150_000.0 + 40_000.0 * (si * 2 + di) as f64 + 500.0 * (year - 2015) as f64;
                table
                    .insert(state, district, year, ha)
                    .expect("positive area");
            }
        }
    }
    table
}

/// Cumulative sum of seeded standard normal draws.
pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            level += e;
            level
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let spec = CorpusSpec::default();
        let rows = corpus(&spec);
        assert_eq!(rows.len(), 5000);
        assert!(rows.windows(2).all(|w| w[0].created_on <= w[1].created_on));
        let planted = rows
            .iter()
            .filter(|r| r.query_text.contains("aphid"))
            .count();
        assert!((planted as f64 - 2000.0).abs() < 200.0, "{planted}");
        assert_eq!(rows, corpus(&spec));
        let last = rows.last().unwrap().date();
        assert!(last < NaiveDate::from_ymd_opt(2021, 1, 1).unwrap());
    }

    #[test]
    fn weights_peak_in_the_chosen_month() {
        let spec = CorpusSpec::default();
        let w = seasonal_weights(&spec);
        let peak = (0..12).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
        assert_eq!(peak as u32 + 1, spec.peak_month);
        assert!((w[12] - w[0]).abs() < 1e-12);
    }

    #[test]
    fn areas_cover_all_years() {
        let spec = CorpusSpec::default();
        let t = area_table(&spec);
        assert_eq!(t.states().len(), 3);
        assert!(t
            .area(crate::RegionLevel::District, "PUNJAB/LUDHIANA", 2020)
            .is_ok());
    }
}
