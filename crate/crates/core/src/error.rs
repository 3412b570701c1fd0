//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A feature, output or engine setting violates its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("duplicate feature name '{0}'")]
    DuplicateFeature(String),

    #[error("unknown feature '{0}'")]
    UnknownFeature(String),

    #[error("instance has {actual} values but the feature space has {expected} features")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("feature '{feature}': {value} is not a valid category index (feature has {count} categories)")]
    InvalidCategory {
        feature: String,
        value: f64,
        count: usize,
    },

    #[error("feature '{feature}': value {value} is not finite")]
    NonFiniteValue { feature: String, value: f64 },

    #[error("invalid coalition: {0}")]
    InvalidCoalition(String),

    #[error("cannot read '{path}': {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV is empty")]
    EmptyCsv,

    #[error("CSV row {row}: {message}")]
    CsvShape { row: usize, message: String },

    #[error("CSV row {row}, column '{column}': cannot parse '{raw}' as a number")]
    CsvParse {
        row: usize,
        column: String,
        raw: String,
    },

    #[error("CSV row {row}, column '{column}': '{raw}' is not a finite number")]
    CsvNonFinite {
        row: usize,
        column: String,
        raw: String,
    },

    #[error("CSV row {row}, column '{column}': missing value")]
    MissingValue { row: usize, column: String },

    #[error("CSV row {row}, column '{column}': unknown category label '{label}'")]
    UnknownLabel {
        row: usize,
        column: String,
        label: String,
    },

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("target list is empty")]
    EmptyTargets,

    #[error("all targets equal {0}; the output range is degenerate")]
    DegenerateTarget(f64),

    /// Prediction failed inside a backend. `row` names the offending batch row when known.
    #[error("model error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Model { row: Option<usize>, message: String },

    /// The external model process broke the wire protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("failed to start model process '{command}': {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("timed out after {0:?} waiting for the model process")]
    Timeout(std::time::Duration),

    #[error("exhaustive grid of {size} rows exceeds the cap of {cap}")]
    GridTooLarge { size: u128, cap: usize },

    #[error("'{label}' (output {output}): {quantity} = {value} lies outside [0, 1]; the model under- or overshoots")]
    Instability {
        label: String,
        output: usize,
        quantity: &'static str,
        value: f64,
    },

    #[error("coalition '{child}' is not a subset of target concept '{target}'")]
    NotSubset { child: String, target: String },

    #[error("target concept '{0}' has ymin = ymax for output {1}, so it has zero importance and cannot serve as a denominator")]
    DegenerateTargetConcept(String, usize),

    #[error("unknown concept '{name}'; available: {}", available.join(", "))]
    UnknownConcept {
        name: String,
        available: Vec<String>,
    },

    #[error("results do not match: {0}")]
    ResultMismatch(String),

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("invalid plot data: {0}")]
    InvalidPlot(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that originate in the model backend or its transport.
    pub fn is_model_failure(&self) -> bool {
        matches!(
            self,
            Error::Model { .. } | Error::Protocol(_) | Error::Spawn { .. } | Error::Timeout(_)
        )
    }
}
