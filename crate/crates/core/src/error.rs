use thiserror::Error;

use crate::model::Violation;

/// Errors raised while ingesting a case or scenario file.
#[derive(Debug, Error)]
pub enum CaseError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{} semantic violation(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Errors from the relay and controller arithmetic.
#[derive(Debug, Error, PartialEq)]
pub enum CalcError {
    #[error("relay pickup must be positive, got {0}")]
    NonPositivePickup(f64),
    #[error("no trip in overcurrent sense: rate {0} <= 1")]
    NoTrip(f64),
    #[error("line {0} is out of service")]
    LineOutOfService(usize),
    #[error("dimension mismatch: incidence has {expected} lines, rate vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Errors from scenario loading and the report writers.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("unknown series {name:?}; available: {available}")]
    UnknownSeries { name: String, available: String },
    #[error("empty series selection")]
    EmptySelection,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
