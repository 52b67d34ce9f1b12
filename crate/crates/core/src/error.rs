use std::path::PathBuf;

use thiserror::Error;

use crate::params::Violation;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no peers: {0}")]
    NoPeers(String),
    #[error("unknown firm {0}")]
    UnknownFirm(String),
    #[error("degenerate series: zero variance")]
    DegenerateSeries,
    #[error("need at least 3 cells, got {0}")]
    TooFewCells(usize),
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("degenerate distribution: zero variance")]
    DegenerateDistribution,
    #[error("coefficient of variation undefined for zero mean")]
    ZeroMean,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameters: {}", join_violations(.0))]
    InvalidParams(Vec<Violation>),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("experiment needs n_reps ≥ 2, got {0}")]
    TooFewReps(usize),
    #[error("welfare denominator degenerate: optimum {optimum} ≤ baseline {baseline}")]
    DegenerateWelfare { optimum: f64, baseline: f64 },
    #[error("trajectory lengths differ")]
    LengthMismatch,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key {key:?} in section [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: bad value for {key}: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("invalid parameters: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("schema mismatch: unexpected column {found:?} at position {position} (expected {expected:?})")]
    Schema { position: usize, expected: String, found: String },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
