//! The `pestpulse` command-line front end.
//!
//! Every subcommand reads files, writes its outputs atomically into
//! `--out-dir` and leaves a `<subcommand>.manifest.json` next to them.
//! Exit codes: 0 success, 1 usage or validation error, 2 data error.

mod commands;
pub mod formats;
pub mod io;
mod pipeline;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::aggregate::{Bin, RegionLevel};
use crate::sarima::SarimaOrder;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("cannot read input {0}")]
    Input(String),
    #[error("cannot write output {0}")]
    Output(String),
    #[error("{0}")]
    Data(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Input(_) => 1,
            CliError::Output(_) | CliError::Data(_) => 2,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pestpulse",
    version,
    about = "Pest-query surveillance pipeline",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Directory for outputs and the manifest.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "PESTPULSE_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub date_from: Option<NaiveDate>,
    #[arg(long)]
    pub date_to: Option<NaiveDate>,
    /// Header renames as `Default=Actual,...`.
    #[arg(long)]
    pub columns_map: Option<String>,
    /// identity | normalize
    #[arg(long, default_value = "identity")]
    pub preprocessor: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LabelArgs {
    /// Cleaned records CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Lexicon JSON or TSV; the bundled reference lexicon when omitted.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeriesArgs {
    /// Labelled CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Pest id, or `all-pests`.
    #[arg(long, default_value = "all-pests")]
    pub pest: String,
    #[arg(long, default_value = "national")]
    pub region_level: RegionLevel,
    /// Region name; empty for national series. Districts may be given as STATE/DISTRICT.
    #[arg(long, default_value = "")]
    pub region: String,
    #[arg(long, default_value = "monthly")]
    pub bin: Bin,
    #[arg(long)]
    pub date_from: Option<NaiveDate>,
    #[arg(long)]
    pub date_to: Option<NaiveDate>,
    /// Divide by gross cropped area (needs --areas).
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub areas: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MapArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub pest: String,
    #[arg(long)]
    pub from: NaiveDate,
    #[arg(long)]
    pub to: NaiveDate,
    #[arg(long)]
    pub areas: PathBuf,
    #[arg(long, default_value = "state")]
    pub region_level: RegionLevel,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AcfArgs {
    /// Series CSV or any CSV with a `value` column.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to min(40, n / 3).
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AdfArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `auto` or a fixed lag count.
    #[arg(long, default_value = "auto")]
    pub lags: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StationarizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelSelection {
    /// `p,d,q` or `p,d,q,P,D,Q,s`.
    #[arg(long, conflicts_with = "grid")]
    pub order: Option<SarimaOrder>,
    /// Grid preset: `default` (p,q,P,Q in 0..2, d,D in 0..1) or `small` (0..1).
    #[arg(long)]
    pub grid: Option<String>,
    /// Candidate seasonal periods; picked from the ACF when omitted.
    #[arg(long, value_delimiter = ',')]
    pub seasons: Option<Vec<usize>>,
    /// Simplex evaluation budget per restart.
    #[arg(long, default_value_t = 4000)]
    pub max_evals: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub selection: ModelSelection,
    /// Fit on ln(1 + y).
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ForecastArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// The series the model was fitted on.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub forecast: PathBuf,
    #[arg(long)]
    pub actual: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Area table; the series is normalized when given.
    #[arg(long)]
    pub areas: Option<PathBuf>,
    #[arg(long, default_value = "all-pests")]
    pub pest: String,
    #[arg(long, default_value = "monthly")]
    pub bin: Bin,
    #[arg(long, default_value = "national")]
    pub region_level: RegionLevel,
    #[arg(long, default_value = "")]
    pub region: String,
    #[arg(long)]
    pub date_from: Option<NaiveDate>,
    #[arg(long)]
    pub date_to: Option<NaiveDate>,
    #[arg(long)]
    pub columns_map: Option<String>,
    #[arg(long, default_value = "identity")]
    pub preprocessor: String,
    #[command(flatten)]
    pub selection: ModelSelection,
    /// Forecast steps; at least the test span.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and clean a raw query dump.
    Ingest(IngestArgs),
    /// Label pest queries against a lexicon.
    Label(LabelArgs),
    /// Bin labelled queries into a frequency series.
    Series(SeriesArgs),
    /// Area-normalized per-region totals for a choropleth.
    Map(MapArgs),
    /// Sample autocorrelation and seasonal candidates.
    Acf(AcfArgs),
    /// Augmented Dickey-Fuller test.
    Adf(AdfArgs),
    /// Log and difference until the ADF test rejects a unit root.
    Stationarize(StationarizeArgs),
    /// Fit one SARIMA order or search a grid by AIC.
    Fit(FitArgs),
    /// Forecast from a fitted model.
    Forecast(ForecastArgs),
    /// Score a forecast against held-out values.
    Eval(EvalArgs),
    /// Run every stage from raw dump to evaluated forecast.
    Pipeline(PipelineArgs),
}

impl Command {
    fn threads(&self) -> Option<usize> {
        let common = match self {
            Command::Ingest(a) => &a.common,
            Command::Label(a) => &a.common,
            Command::Series(a) => &a.common,
            Command::Map(a) => &a.common,
            Command::Acf(a) => &a.common,
            Command::Adf(a) => &a.common,
            Command::Stationarize(a) => &a.common,
            Command::Fit(a) => &a.common,
            Command::Forecast(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Pipeline(a) => &a.common,
        };
        common.threads
    }

    fn execute(&self) -> Result<(), CliError> {
        match self {
            Command::Ingest(a) => commands::ingest(a),
            Command::Label(a) => commands::label(a),
            Command::Series(a) => commands::series(a),
            Command::Map(a) => commands::map(a),
            Command::Acf(a) => commands::acf(a),
            Command::Adf(a) => commands::adf(a),
            Command::Stationarize(a) => commands::stationarize(a),
            Command::Fit(a) => commands::fit(a),
            Command::Forecast(a) => commands::forecast(a),
            Command::Eval(a) => commands::eval(a),
            Command::Pipeline(a) => pipeline::run(a),
        }
    }
}

/// Parse `argv` (including the program name), run the subcommand and return
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    eprint!("{}", e.render());
                    1
                }
            };
        }
    };
    let threads = cli.command.threads().unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| cli.command.execute()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
