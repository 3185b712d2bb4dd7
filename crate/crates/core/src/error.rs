use chrono::NaiveDate;
use thiserror::Error;

/// Errors produced by the engine.
///
/// `Validation`-style variants indicate bad inputs (files, config, schemas);
/// `Computation` variants indicate a numerically impossible state reached
/// during a run. The CLI maps the two families to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("dates must be strictly increasing (offending date: {0})")]
    UnsortedDates(NaiveDate),

    #[error("length mismatch: {dates} dates vs {values} values")]
    LengthMismatch { dates: usize, values: usize },

    #[error("calendar intersection is empty; disjoint series: {names:?}")]
    EmptyIntersection { names: Vec<String> },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("{path}:{line}: {msg}")]
    Malformed {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("validation error in {path}: {msg}")]
    Validation { path: String, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("signal value {value} out of range for {kind} signal")]
    SignalRange { kind: &'static str, value: f64 },

    #[error("weight {value} outside [0, 1] for asset {asset}")]
    WeightRange { asset: String, value: f64 },

    #[error("strategy value annihilated on {date}: step factor {factor}")]
    ValueAnnihilation { date: NaiveDate, factor: f64 },

    #[error("zero realized volatility; cannot rescale")]
    ZeroVol,

    #[error("candidate backtests are on different calendars")]
    CalendarMismatch,

    #[error("scoring failed for {date}: {msg}")]
    ScorerFailure { date: NaiveDate, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error stems from bad inputs rather than a failed
    /// computation. Drives the CLI exit-code split (2 vs 3).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::ValueAnnihilation { .. } | Error::ZeroVol | Error::CalendarMismatch
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
