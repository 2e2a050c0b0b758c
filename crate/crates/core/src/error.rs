use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),

    #[error("operation requires a single-entry instance; component {component} has {entries} entries")]
    MultiEntry { component: usize, entries: usize },

    #[error("flow for component {component} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        component: usize,
        expected: usize,
        found: usize,
    },

    #[error("flow has {found} component vectors, instance has {expected} components")]
    ComponentCountMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{0} is not an exit of component 1")]
    NotAnExit(String),

    #[error("time {requested} lies beyond the decided horizon (run stopped at {stopped_at})")]
    BeyondHorizon { requested: u64, stopped_at: u64 },

    #[error("bad flow document: {0}")]
    FlowFormat(String),

    #[error("bad bit encoding: {0}")]
    Encoding(String),

    #[error("uniqueness lemma violated: {0}")]
    Lemma(String),

    #[error("internal invariant failure: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
