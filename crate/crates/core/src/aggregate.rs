//! Calendar-binned frequency series, area normalization and map exports.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{canonical_region, DateWindow, KccRecord};
use crate::lexicon::PestLabel;

/// Years of slack when an exact area year is missing.
pub const AREA_YEAR_TOLERANCE: i32 = 2;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("no gross cropped area for {region} in {year}")]
    MissingArea { region: String, year: i32 },
    #[error("district `{0}` exists in several states; qualify it as STATE/DISTRICT")]
    AmbiguousDistrict(String),
    #[error("{0}-level series cannot be area normalized")]
    UnsupportedLevel(RegionLevel),
    #[error("series is already normalized")]
    AlreadyNormalized,
    #[error("invalid series key: {0}")]
    InvalidKey(String),
    #[error("area table row {row}: {message}")]
    AreaRow { row: usize, message: String },
    #[error("series CSV row {row}: {message}")]
    SeriesRow { row: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionLevel {
    National,
    State,
    District,
    Block,
}

impl fmt::Display for RegionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionLevel::National => "national",
            RegionLevel::State => "state",
            RegionLevel::District => "district",
            RegionLevel::Block => "block",
        })
    }
}

impl FromStr for RegionLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "national" => Ok(Self::National),
            "state" => Ok(Self::State),
            "district" => Ok(Self::District),
            "block" => Ok(Self::Block),
            other => Err(format!("unknown region level `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PestSelector {
    Pest(String),
    All,
}

impl PestSelector {
    pub const ALL_NAME: &'static str = "all-pests";

    pub fn matches(&self, label: &PestLabel) -> bool {
        match self {
            PestSelector::All => true,
            PestSelector::Pest(id) => &label.pest_id == id,
        }
    }
}

impl fmt::Display for PestSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PestSelector::All => f.write_str(Self::ALL_NAME),
            PestSelector::Pest(id) => f.write_str(id),
        }
    }
}

impl FromStr for PestSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(if s == Self::ALL_NAME || s == "all" {
            PestSelector::All
        } else {
            PestSelector::Pest(s.to_string())
        })
    }
}

/// Which records a series counts.
///
/// District regions may be written `STATE/DISTRICT` to disambiguate
/// district names that occur in several states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesKey {
    pub level: RegionLevel,
    pub region: String,
    pub pest: PestSelector,
}

impl SeriesKey {
    pub fn new(
        level: RegionLevel,
        region: &str,
        pest: PestSelector,
    ) -> Result<Self, AggregateError> {
        let region = canonical_region(region);
        if region.is_empty() != (level == RegionLevel::National) {
            return Err(AggregateError::InvalidKey(format!(
                "region must be empty exactly for national keys (level {level}, region `{region}`)"
            )));
        }
        Ok(Self {
            level,
            region,
            pest,
        })
    }

    pub fn national(pest: PestSelector) -> Self {
        Self {
            level: RegionLevel::National,
            region: String::new(),
            pest,
        }
    }

    fn matches_region(&self, rec: &KccRecord) -> bool {
        match self.level {
            RegionLevel::National => true,
            RegionLevel::State => rec.state == self.region,
            RegionLevel::District => match self.region.split_once('/') {
                Some((state, district)) => rec.state == state && rec.district == district,
                None => rec.district == self.region,
            },
            RegionLevel::Block => rec.block == self.region,
        }
    }

    pub fn matches(&self, rec: &KccRecord, label: &PestLabel) -> bool {
        self.pest.matches(label) && self.matches_region(rec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bin {
    Daily,
    Monthly,
}

impl Bin {
    /// First day of the bin containing `date`.
    pub fn floor(self, date: NaiveDate) -> NaiveDate {
        match self {
            Bin::Daily => date,
            Bin::Monthly => date.with_day(1).expect("day 1 exists"),
        }
    }

    pub fn offset(self, start: NaiveDate, steps: usize) -> NaiveDate {
        match self {
            Bin::Daily => start + chrono::Days::new(steps as u64),
            Bin::Monthly => start + Months::new(steps as u32),
        }
    }

    /// Bin index of `date` relative to the bin starting at `start`.
    pub fn index(self, start: NaiveDate, date: NaiveDate) -> Option<usize> {
        let idx = match self {
            Bin::Daily => (date - start).num_days(),
            Bin::Monthly => {
                (date.year() - start.year()) as i64 * 12 + date.month() as i64
                    - start.month() as i64
            }
        };
        usize::try_from(idx).ok()
    }

    /// Number of bins covering `window`.
    pub fn count(self, window: &DateWindow) -> usize {
        let start = self.floor(window.from);
        self.index(start, window.to).expect("window is ordered") + 1
    }
}

impl FromStr for Bin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "daily" => Ok(Bin::Daily),
            "monthly" => Ok(Bin::Monthly),
            other => Err(format!("unknown bin `{other}` (expected daily|monthly)")),
        }
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bin::Daily => "daily",
            Bin::Monthly => "monthly",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "queries")]
    Queries,
    #[serde(rename = "queries per 1000 ha")]
    QueriesPer1000Ha,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Queries => "queries",
            Unit::QueriesPer1000Ha => "queries per 1000 ha",
        }
    }
}

/// Gap-free series of per-bin values for one key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySeries {
    pub key: SeriesKey,
    pub bin: Bin,
    pub start: NaiveDate,
    pub values: Vec<f64>,
    pub normalized: bool,
    pub unit: Unit,
}

impl FrequencySeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.bin.offset(self.start, index)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Same key and bins with new values, e.g. after a transform.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            ..self.clone()
        }
    }
}

/// Count labelled records per bin over the whole `window`, zero-filled.
/// Records outside the window are ignored.
pub fn build_series(
    labelled: &[(KccRecord, PestLabel)],
    key: &SeriesKey,
    bin: Bin,
    window: &DateWindow,
) -> FrequencySeries {
    let start = bin.floor(window.from);
    let mut values = vec![0.0; bin.count(window)];
    for (rec, label) in labelled {
        let date = rec.date();
        if !window.contains(date) || !key.matches(rec, label) {
            continue;
        }
        if let Some(slot) = bin.index(start, date).and_then(|i| values.get_mut(i)) {
            *slot += 1.0;
        }
    }
    FrequencySeries {
        key: key.clone(),
        bin,
        start,
        values,
        normalized: false,
        unit: Unit::Queries,
    }
}

/// Gross cropped area in hectares per (state, district, year).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AreaTable {
    rows: BTreeMap<(String, String, i32), f64>,
}

impl AreaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        state: &str,
        district: &str,
        year: i32,
        hectares: f64,
    ) -> Result<(), AggregateError> {
        if !(hectares.is_finite() && hectares > 0.0) {
            return Err(AggregateError::AreaRow {
                row: self.rows.len() + 1,
                message: format!("area must be positive, got {hectares}"),
            });
        }
        self.rows.insert(
            (canonical_region(state), canonical_region(district), year),
            hectares,
        );
        Ok(())
    }

    /// CSV with columns `state, district, year, gca_ha`.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, AggregateError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = reader.headers()?.clone();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or(AggregateError::AreaRow {
                    row: 0,
                    message: format!("missing column `{name}`"),
                })
        };
        let (s, d, y, a) = (
            col("state")?,
            col("district")?,
            col("year")?,
            col("gca_ha")?,
        );
        let mut table = AreaTable::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let bad = |message: String| AggregateError::AreaRow {
                row: i + 1,
                message,
            };
            let year: i32 = row[y]
                .parse()
                .map_err(|_| bad(format!("bad year `{}`", &row[y])))?;
            let area: f64 = row[a]
                .parse()
                .map_err(|_| bad(format!("bad area `{}`", &row[a])))?;
            table
                .insert(&row[s], &row[d], year, area)
                .map_err(|e| match e {
                    AggregateError::AreaRow { message, .. } => bad(message),
                    other => other,
                })?;
        }
        Ok(table)
    }

    pub fn to_csv<W: Write>(&self, output: W) -> Result<(), AggregateError> {
        let mut writer = csv::Writer::from_writer(output);
        writer.write_record(["state", "district", "year", "gca_ha"])?;
        for ((s, d, y), a) in &self.rows {
            writer.write_record([s.clone(), d.clone(), y.to_string(), a.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn states(&self) -> BTreeSet<String> {
        self.rows.keys().map(|(s, _, _)| s.clone()).collect()
    }

    /// `STATE/DISTRICT` names.
    pub fn districts(&self) -> BTreeSet<String> {
        self.rows
            .keys()
            .map(|(s, d, _)| format!("{s}/{d}"))
            .collect()
    }

    fn district_years(&self, state: &str, district: &str) -> BTreeMap<i32, f64> {
        self.rows
            .iter()
            .filter(|((s, d, _), _)| s == state && d == district)
            .map(|((_, _, y), a)| (*y, *a))
            .collect()
    }

    fn state_years(&self, state: &str) -> BTreeMap<i32, f64> {
        let mut years = BTreeMap::new();
        for ((s, _, y), a) in &self.rows {
            if s == state {
                *years.entry(*y).or_insert(0.0) += a;
            }
        }
        years
    }

    fn resolve_district(&self, region: &str) -> Result<(String, String), AggregateError> {
        if let Some((s, d)) = region.split_once('/') {
            return Ok((s.to_string(), d.to_string()));
        }
        let states: BTreeSet<&String> = self
            .rows
            .keys()
            .filter(|(_, d, _)| d == region)
            .map(|(s, _, _)| s)
            .collect();
        match states.len() {
            0 => Err(AggregateError::MissingArea {
                region: region.to_string(),
                year: 0,
            }),
            1 => Ok((
                states.into_iter().next().unwrap().clone(),
                region.to_string(),
            )),
            _ => Err(AggregateError::AmbiguousDistrict(region.to_string())),
        }
    }

    /// Year-to-area lookup for a region at `level`.
    fn years_for(
        &self,
        level: RegionLevel,
        region: &str,
    ) -> Result<BTreeMap<i32, f64>, AggregateError> {
        match level {
            RegionLevel::National => {
                let mut years = BTreeMap::new();
                for ((_, _, y), a) in &self.rows {
                    *years.entry(*y).or_insert(0.0) += a;
                }
                Ok(years)
            }
            RegionLevel::State => Ok(self.state_years(region)),
            RegionLevel::District => {
                let (s, d) = self.resolve_district(region)?;
                Ok(self.district_years(&s, &d))
            }
            other => Err(AggregateError::UnsupportedLevel(other)),
        }
    }

    /// Area of the whole table (national), a state (sum of its districts)
    /// or a district for `year`.
    pub fn area(&self, level: RegionLevel, region: &str, year: i32) -> Result<f64, AggregateError> {
        let years = self.years_for(level, region)?;
        nearest_year(&years, year).ok_or_else(|| AggregateError::MissingArea {
            region: region.to_string(),
            year,
        })
    }
}

/// Exact year, else the nearest year within the tolerance (earlier first).
fn nearest_year(years: &BTreeMap<i32, f64>, year: i32) -> Option<f64> {
    if let Some(a) = years.get(&year) {
        return Some(*a);
    }
    for delta in 1..=AREA_YEAR_TOLERANCE {
        for candidate in [year - delta, year + delta] {
            if let Some(a) = years.get(&candidate) {
                log::warn!("area for {year} missing; using {candidate}");
                return Some(*a);
            }
        }
    }
    None
}

/// Divide each bin by the region's gross cropped area for the bin's
/// calendar year, in queries per 1000 ha. A national series uses the
/// table total.
pub fn normalize_by_area(
    series: &FrequencySeries,
    areas: &AreaTable,
) -> Result<FrequencySeries, AggregateError> {
    if series.normalized {
        return Err(AggregateError::AlreadyNormalized);
    }
    let level = series.key.level;
    if level == RegionLevel::Block {
        return Err(AggregateError::UnsupportedLevel(level));
    }
    let years = areas.years_for(level, &series.key.region)?;
    let mut cache: HashMap<i32, f64> = HashMap::new();
    let mut values = Vec::with_capacity(series.len());
    for (i, v) in series.values.iter().enumerate() {
        let year = series.date_at(i).year();
        let area = match cache.get(&year) {
            Some(a) => *a,
            None => {
                let a = nearest_year(&years, year).ok_or_else(|| AggregateError::MissingArea {
                    region: series.key.region.clone(),
                    year,
                })?;
                cache.insert(year, a);
                a
            }
        };
        values.push(v * 1000.0 / area);
    }
    Ok(FrequencySeries {
        values,
        normalized: true,
        unit: Unit::QueriesPer1000Ha,
        ..series.clone()
    })
}

/// Totals per calendar month across all years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthlyProfile(pub [f64; 12]);

impl MonthlyProfile {
    /// Value for calendar month `month` in 1..=12.
    pub fn month(&self, month: u32) -> f64 {
        self.0[month as usize - 1]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

pub fn monthly_profile(series: &FrequencySeries) -> MonthlyProfile {
    let mut profile = [0.0; 12];
    for (i, v) in series.values.iter().enumerate() {
        profile[series.date_at(i).month0() as usize] += v;
    }
    MonthlyProfile(profile)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoroplethRow {
    pub region: String,
    pub value: f64,
}

/// Area-normalized query totals for every region in the area table with
/// cultivated area in the period, sorted by descending value.
///
/// Each query contributes 1000 / area of its region in its calendar year,
/// so a multi-year period is the sum of the per-year normalized counts.
pub fn choropleth_export(
    labelled: &[(KccRecord, PestLabel)],
    pest: &PestSelector,
    period: &DateWindow,
    level: RegionLevel,
    areas: &AreaTable,
) -> Result<Vec<ChoroplethRow>, AggregateError> {
    let region_of = |rec: &KccRecord| match level {
        RegionLevel::State => Ok(rec.state.clone()),
        RegionLevel::District => Ok(format!("{}/{}", rec.state, rec.district)),
        other => Err(AggregateError::UnsupportedLevel(other)),
    };
    let regions = match level {
        RegionLevel::State => areas.states(),
        RegionLevel::District => areas.districts(),
        other => return Err(AggregateError::UnsupportedLevel(other)),
    };
    let period_years: Vec<i32> = (period.from.year()..=period.to.year()).collect();

    let mut counts: BTreeMap<(String, i32), f64> = BTreeMap::new();
    for (rec, label) in labelled {
        if period.contains(rec.date()) && pest.matches(label) {
            *counts
                .entry((region_of(rec)?, rec.date().year()))
                .or_insert(0.0) += 1.0;
        }
    }

    let mut rows = Vec::new();
    for region in &regions {
        let years = areas.years_for(level, region)?;
        if !period_years
            .iter()
            .any(|y| nearest_year(&years, *y).is_some())
        {
            continue;
        }
        let mut value = 0.0;
        for ((r, year), count) in
            counts.range((region.clone(), i32::MIN)..=(region.clone(), i32::MAX))
        {
            debug_assert_eq!(r, region);
            let area = nearest_year(&years, *year).ok_or_else(|| AggregateError::MissingArea {
                region: region.clone(),
                year: *year,
            })?;
            value += count * 1000.0 / area;
        }
        rows.push(ChoroplethRow {
            region: region.clone(),
            value,
        });
    }
    if let Some(((region, year), _)) = counts.iter().find(|((r, _), _)| !regions.contains(r)) {
        return Err(AggregateError::MissingArea {
            region: region.clone(),
            year: *year,
        });
    }
    rows.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then_with(|| a.region.cmp(&b.region))
    });
    Ok(rows)
}

pub fn write_choropleth_csv<W: Write>(
    output: W,
    rows: &[ChoroplethRow],
) -> Result<(), AggregateError> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(["region", "value"])?;
    for row in rows {
        writer.write_record([row.region.clone(), row.value.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

/// Region-keyed JSON object for external map renderers.
pub fn choropleth_json(rows: &[ChoroplethRow]) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = rows
        .iter()
        .map(|r| (r.region.clone(), serde_json::json!(r.value)))
        .collect();
    serde_json::Value::Object(map)
}

const SERIES_HEADER: [&str; 6] = ["date", "region_level", "region", "pest_id", "value", "unit"];

/// Series CSV: `date, region_level, region, pest_id, value, unit`.
pub fn write_series_csv<W: Write>(
    output: W,
    series: &FrequencySeries,
) -> Result<(), AggregateError> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(SERIES_HEADER)?;
    let level = series.key.level.to_string();
    let pest = series.key.pest.to_string();
    for (i, v) in series.values.iter().enumerate() {
        writer.write_record([
            series.date_at(i).format("%Y-%m-%d").to_string(),
            level.clone(),
            series.key.region.clone(),
            pest.clone(),
            v.to_string(),
            series.unit.as_str().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a series written by [`write_series_csv`]. The bin is inferred from
/// the spacing of the first two dates (a single row is taken as monthly
/// when it falls on the first of a month).
pub fn read_series_csv<R: Read>(input: R) -> Result<FrequencySeries, AggregateError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != SERIES_HEADER {
        return Err(AggregateError::SeriesRow {
            row: 0,
            message: format!("expected header {}", SERIES_HEADER.join(",")),
        });
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut meta: Option<(RegionLevel, String, PestSelector, Unit)> = None;
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |message: String| AggregateError::SeriesRow {
            row: i + 1,
            message,
        };
        dates.push(
            NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
                .map_err(|_| bad(format!("bad date `{}`", &row[0])))?,
        );
        let v: f64 = row[4]
            .parse()
            .map_err(|_| bad(format!("bad value `{}`", &row[4])))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad(format!(
                "value must be finite and non-negative, got {v}"
            )));
        }
        values.push(v);
        if meta.is_none() {
            let level: RegionLevel = row[1].parse().map_err(bad)?;
            let unit = match &row[5] {
                "queries" => Unit::Queries,
                "queries per 1000 ha" => Unit::QueriesPer1000Ha,
                other => return Err(bad(format!("unknown unit `{other}`"))),
            };
            meta = Some((level, row[2].to_string(), row[3].parse().unwrap(), unit));
        }
    }
    let (level, region, pest, unit) = meta.ok_or(AggregateError::SeriesRow {
        row: 0,
        message: "no data rows".into(),
    })?;
    let bin = match dates.get(1) {
        Some(second) if (*second - dates[0]).num_days() == 1 => Bin::Daily,
        Some(_) => Bin::Monthly,
        None if dates[0].day() == 1 => Bin::Monthly,
        None => Bin::Daily,
    };
    for (i, d) in dates.iter().enumerate() {
        if bin.offset(dates[0], i) != *d {
            return Err(AggregateError::SeriesRow {
                row: i + 1,
                message: format!("date {d} breaks the {bin} sequence"),
            });
        }
    }
    Ok(FrequencySeries {
        key: SeriesKey::new(level, &region, pest)?,
        bin,
        start: dates[0],
        values,
        normalized: unit == Unit::QueriesPer1000Ha,
        unit,
    })
}
