//! Parsing and cleaning of raw call-center query dumps.
//!
//! A dump is a UTF-8 CSV with a header row. Each accepted row becomes a
//! [`KccRecord`]; every rejected row is counted by reason in an
//! [`IngestReport`], so `total_rows` always equals `accepted` plus the sum of
//! the rejection counters.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S%.3f";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable header: {0}")]
    Header(String),
    #[error("required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("invalid column mapping `{0}`")]
    ColumnMap(String),
    #[error("invalid date window: {0}")]
    Window(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Season {
    Rabi,
    Kharif,
    Zaid,
    Unknown,
}

impl Season {
    /// Lenient parse; anything outside the three crop seasons is `Unknown`.
    pub fn parse(raw: &str) -> Self {
        match raw.trim().to_ascii_uppercase().as_str() {
            "RABI" => Season::Rabi,
            "KHARIF" => Season::Kharif,
            "ZAID" => Season::Zaid,
            _ => Season::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Season::Rabi => "RABI",
            Season::Kharif => "KHARIF",
            Season::Zaid => "ZAID",
            Season::Unknown => "UNKNOWN",
        }
    }
}

/// One cleaned call-center query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KccRecord {
    pub season: Season,
    pub sector: String,
    pub category: String,
    pub crop: String,
    pub query_type: String,
    pub query_text: String,
    pub answer_text: String,
    pub state: String,
    pub district: String,
    pub block: String,
    pub created_on: NaiveDateTime,
}

impl KccRecord {
    pub fn date(&self) -> NaiveDate {
        self.created_on.date()
    }
}

/// Trim and uppercase a region name so it can be used as a key.
pub fn canonical_region(raw: &str) -> String {
    raw.trim().to_uppercase()
}

/// Parse `YYYY-MM-DD HH:MM:SS.fff` (fraction optional) or a bare `YYYY-MM-DD`,
/// truncated to millisecond precision.
pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    let parsed = NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S%.f")
        .ok()
        .or_else(|| {
            NaiveDate::parse_from_str(raw, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })?;
    let millis = parsed.nanosecond() / 1_000_000;
    parsed.with_nanosecond(millis * 1_000_000)
}

pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

/// Inclusive calendar-date window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl DateWindow {
    pub fn new(from: NaiveDate, to: NaiveDate) -> Result<Self, IngestError> {
        if from > to {
            return Err(IngestError::Window(format!("{from} is after {to}")));
        }
        Ok(Self { from, to })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.from <= date && date <= self.to
    }
}

impl Default for DateWindow {
    fn default() -> Self {
        Self {
            from: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            to: NaiveDate::from_ymd_opt(2020, 12, 31).expect("valid date"),
        }
    }
}

/// The eleven logical fields of a dump row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Season,
    Sector,
    Category,
    Crop,
    QueryType,
    QueryText,
    Answer,
    State,
    District,
    Block,
    CreatedOn,
}

impl Field {
    pub const ALL: [Field; 11] = [
        Field::Season,
        Field::Sector,
        Field::Category,
        Field::Crop,
        Field::QueryType,
        Field::QueryText,
        Field::Answer,
        Field::State,
        Field::District,
        Field::Block,
        Field::CreatedOn,
    ];

    pub fn default_header(self) -> &'static str {
        match self {
            Field::Season => "Season",
            Field::Sector => "Sector",
            Field::Category => "Category",
            Field::Crop => "Crop",
            Field::QueryType => "QueryType",
            Field::QueryText => "QueryText",
            Field::Answer => "KccAns",
            Field::State => "StateName",
            Field::District => "DistrictName",
            Field::Block => "BlockName",
            Field::CreatedOn => "CreatedOn",
        }
    }

    fn required(self) -> bool {
        matches!(
            self,
            Field::QueryText | Field::State | Field::District | Field::CreatedOn
        )
    }

    fn from_default_header(name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.default_header() == name)
    }
}

/// Maps logical fields to the header names used in a particular dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    names: HashMap<Field, String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            names: Field::ALL
                .into_iter()
                .map(|f| (f, f.default_header().to_string()))
                .collect(),
        }
    }
}

impl ColumnMap {
    pub fn header(&self, field: Field) -> &str {
        &self.names[&field]
    }

    pub fn rename(&mut self, field: Field, header: impl Into<String>) {
        self.names.insert(field, header.into());
    }
}

/// `DefaultName=ActualName` pairs separated by commas, e.g.
/// `KccAns=Answer,CreatedOn=created_at`.
impl FromStr for ColumnMap {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut map = ColumnMap::default();
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (from, to) = pair
                .split_once('=')
                .ok_or_else(|| IngestError::ColumnMap(pair.to_string()))?;
            let field = Field::from_default_header(from.trim())
                .ok_or_else(|| IngestError::ColumnMap(pair.to_string()))?;
            map.rename(field, to.trim());
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestConfig {
    pub columns: ColumnMap,
    pub window: DateWindow,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub total_rows: usize,
    pub accepted: usize,
    pub rejected_malformed: usize,
    pub rejected_missing_field: usize,
    pub rejected_bad_timestamp: usize,
    pub rejected_out_of_window: usize,
    /// Records whose text preprocessing failed; they are kept unmodified and
    /// are not part of the row accounting.
    pub preprocess_failures: usize,
}

impl IngestReport {
    pub fn rejected(&self) -> usize {
        self.rejected_malformed
            + self.rejected_missing_field
            + self.rejected_bad_timestamp
            + self.rejected_out_of_window
    }

    pub fn is_balanced(&self) -> bool {
        self.total_rows == self.accepted + self.rejected()
    }

    /// Combine reports from shards of the same input.
    pub fn merge(&mut self, other: &IngestReport) {
        self.total_rows += other.total_rows;
        self.accepted += other.accepted;
        self.rejected_malformed += other.rejected_malformed;
        self.rejected_missing_field += other.rejected_missing_field;
        self.rejected_bad_timestamp += other.rejected_bad_timestamp;
        self.rejected_out_of_window += other.rejected_out_of_window;
        self.preprocess_failures += other.preprocess_failures;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rejection {
    Malformed,
    MissingField,
    BadTimestamp,
    OutOfWindow,
}

/// Parse a dump into records, preserving row order.
///
/// Only a broken header (or an I/O failure) is fatal; problems with
/// individual rows are counted in the report.
pub fn parse_records<R: Read>(
    input: R,
    config: &IngestConfig,
) -> Result<(Vec<KccRecord>, IngestReport), IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader
        .byte_headers()
        .map_err(|e| IngestError::Header(e.to_string()))?
        .clone();
    let header: Vec<String> = header
        .iter()
        .map(|h| {
            std::str::from_utf8(h)
                .map(|s| s.trim().trim_start_matches('\u{feff}').to_string())
                .map_err(|e| IngestError::Header(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    if header.iter().all(String::is_empty) {
        return Err(IngestError::Header("empty header row".into()));
    }

    let mut positions: HashMap<Field, usize> = HashMap::new();
    for field in Field::ALL {
        let name = config.columns.header(field);
        match header.iter().position(|h| h == name) {
            Some(idx) => {
                positions.insert(field, idx);
            }
            None if field.required() => return Err(IngestError::MissingColumn(name.into())),
            None => {}
        }
    }

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    let mut row = csv::ByteRecord::new();
    while reader.read_byte_record(&mut row)? {
        report.total_rows += 1;
        match record_from_row(&row, header.len(), &positions, config) {
            Ok(rec) => {
                report.accepted += 1;
                records.push(rec);
            }
            Err(Rejection::Malformed) => report.rejected_malformed += 1,
            Err(Rejection::MissingField) => report.rejected_missing_field += 1,
            Err(Rejection::BadTimestamp) => report.rejected_bad_timestamp += 1,
            Err(Rejection::OutOfWindow) => report.rejected_out_of_window += 1,
        }
    }
    Ok((records, report))
}

fn record_from_row(
    row: &csv::ByteRecord,
    width: usize,
    positions: &HashMap<Field, usize>,
    config: &IngestConfig,
) -> Result<KccRecord, Rejection> {
    if row.len() != width {
        return Err(Rejection::Malformed);
    }
    let mut values: HashMap<Field, &str> = HashMap::with_capacity(Field::ALL.len());
    for (&field, &idx) in positions {
        let raw = std::str::from_utf8(&row[idx]).map_err(|_| Rejection::Malformed)?;
        values.insert(field, raw);
    }
    let get = |f: Field| values.get(&f).copied().unwrap_or("");

    let state = canonical_region(get(Field::State));
    let district = canonical_region(get(Field::District));
    let created_raw = get(Field::CreatedOn).trim();
    if state.is_empty() || district.is_empty() || created_raw.is_empty() {
        return Err(Rejection::MissingField);
    }
    let created_on = parse_timestamp(created_raw).ok_or(Rejection::BadTimestamp)?;
    if !config.window.contains(created_on.date()) {
        return Err(Rejection::OutOfWindow);
    }
    Ok(KccRecord {
        season: Season::parse(get(Field::Season)),
        sector: get(Field::Sector).to_string(),
        category: get(Field::Category).to_string(),
        crop: get(Field::Crop).to_string(),
        query_type: get(Field::QueryType).to_string(),
        query_text: get(Field::QueryText).to_string(),
        answer_text: get(Field::Answer).to_string(),
        state,
        district,
        block: canonical_region(get(Field::Block)),
        created_on,
    })
}

pub(crate) fn record_fields(rec: &KccRecord) -> [String; 11] {
    [
        rec.season.as_str().to_string(),
        rec.sector.clone(),
        rec.category.clone(),
        rec.crop.clone(),
        rec.query_type.clone(),
        rec.query_text.clone(),
        rec.answer_text.clone(),
        rec.state.clone(),
        rec.district.clone(),
        rec.block.clone(),
        format_timestamp(&rec.created_on),
    ]
}

pub fn default_headers() -> [&'static str; 11] {
    Field::ALL.map(Field::default_header)
}

/// Write records with the default column names.
pub fn write_records<W: Write>(output: W, records: &[KccRecord]) -> Result<(), IngestError> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(default_headers())?;
    for rec in records {
        writer.write_record(record_fields(rec))?;
    }
    writer.flush()?;
    Ok(())
}

/// Keep records with non-empty state and district.
///
/// `created_on` is a parsed timestamp, so any record that reaches this point
/// already has a valid creation date.
pub fn clean(records: Vec<KccRecord>) -> Vec<KccRecord> {
    records
        .into_iter()
        .filter(|r| !r.state.trim().is_empty() && !r.district.trim().is_empty())
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("text preprocessing failed: {0}")]
pub struct PreprocessError(pub String);

/// A deterministic text rewrite applied to question and answer text, e.g. a
/// translator or spell corrector.
pub trait TextPreprocessor: Send + Sync {
    fn process(&self, text: &str) -> Result<String, PreprocessError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl TextPreprocessor for Identity {
    fn process(&self, text: &str) -> Result<String, PreprocessError> {
        Ok(text.to_string())
    }
}

/// Lowercase, turn every non-alphanumeric character into a space and
/// collapse runs of whitespace.
#[derive(Debug, Clone, Copy, Default)]
pub struct Normalizer;

impl TextPreprocessor for Normalizer {
    fn process(&self, text: &str) -> Result<String, PreprocessError> {
        Ok(normalize_text(text))
    }
}

pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_lowercase());
        } else {
            pending_space = true;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessorKind {
    Identity,
    #[default]
    Normalize,
}

impl PreprocessorKind {
    pub fn build(self) -> Box<dyn TextPreprocessor> {
        match self {
            PreprocessorKind::Identity => Box::new(Identity),
            PreprocessorKind::Normalize => Box::new(Normalizer),
        }
    }
}

impl FromStr for PreprocessorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Self::Identity),
            "normalize" => Ok(Self::Normalize),
            other => Err(format!(
                "unknown preprocessor `{other}` (expected identity|normalize)"
            )),
        }
    }
}

impl fmt::Display for PreprocessorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Identity => "identity",
            Self::Normalize => "normalize",
        })
    }
}

/// Rewrite question and answer text. On failure the record comes back
/// unmodified together with the error.
pub fn preprocess_text(
    record: &KccRecord,
    preprocessor: &dyn TextPreprocessor,
) -> (KccRecord, Option<PreprocessError>) {
    let rewritten = preprocessor
        .process(&record.query_text)
        .and_then(|q| preprocessor.process(&record.answer_text).map(|a| (q, a)));
    match rewritten {
        Ok((query_text, answer_text)) => (
            KccRecord {
                query_text,
                answer_text,
                ..record.clone()
            },
            None,
        ),
        Err(e) => (record.clone(), Some(e)),
    }
}

/// Preprocess every record, counting failures in `report`.
pub fn preprocess_all(
    records: &[KccRecord],
    preprocessor: &dyn TextPreprocessor,
    report: &mut IngestReport,
) -> Vec<KccRecord> {
    records
        .iter()
        .map(|r| {
            let (rec, err) = preprocess_text(r, preprocessor);
            if let Some(e) = err {
                log::warn!("{e}; record kept unmodified");
                report.preprocess_failures += 1;
            }
            rec
        })
        .collect()
}
