//! Pest-surveillance signals from crowdsourced farmer call-center queries.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`ingest`]: parse and clean raw query dumps.
//! - [`lexicon`]: label pest queries by fuzzy matching against a pest vocabulary.
//! - [`aggregate`]: calendar-binned, area-normalized frequency series and map exports.
//! - [`diagnostics`]: autocorrelation, transforms and the augmented Dickey-Fuller test.
//! - [`sarima`]: seasonal ARIMA estimation, order search, forecasting and simulation.
//! - [`cli`]: the `pestpulse` command-line front end.

pub mod aggregate;
pub mod cli;
pub mod diagnostics;
pub mod ingest;
pub mod lexicon;
pub mod sarima;
pub mod synthetic;

pub use aggregate::{AreaTable, Bin, FrequencySeries, PestSelector, RegionLevel, SeriesKey};
pub use diagnostics::{AdfResult, LagPolicy, TransformRecord};
pub use ingest::{DateWindow, IngestConfig, IngestReport, KccRecord, Season};
pub use lexicon::{PestLabel, PestLexicon, Source};
pub use sarima::{Forecast, SarimaModel, SarimaOrder};
