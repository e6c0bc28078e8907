use alloc::string::String;

use thiserror::Error;

use crate::types::{EdgeId, VertexId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("edge id {0} was already seen")]
    DuplicateEdge(EdgeId),
    #[error("edge {0} has negative timestamp {1}")]
    NegativeTimestamp(EdgeId, i64),
    #[error("edge {0} at {1} is older than the retention horizon")]
    Outdated(EdgeId, i64),
    #[error("a window is required together with an anchor timestamp")]
    WindowWithoutAnchor,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("non-finite attribute value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("remove from empty accumulator (vertex {vertex})")]
    RemoveFromEmpty { vertex: VertexId },
    #[error("statistic {0} is not enabled")]
    NotEnabled(&'static str),
    #[error("unknown statistics attribute {0:?}")]
    UnknownAttribute(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("retention window must be positive, got {0}")]
    NonPositiveRetention(i64),
    #[error("pattern window {name} = {value} must lie in [0, {retention}]")]
    PatternWindow { name: &'static str, value: i64, retention: i64 },
    #[error("cycle max_length must be at least 2, got {0}")]
    CycleLength(u32),
    #[error("temporal cycle max length must be at least 2, got {0}")]
    TemporalCycleLength(u32),
    #[error("worker_count must be at least 1")]
    ZeroWorkers,
    #[error("bin boundaries for {family} are invalid: {reason}")]
    Bins { family: &'static str, reason: &'static str },
    #[error("input schema role {0} has an empty column name")]
    EmptyRole(&'static str),
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("statistics attribute {0:?} is not an input attribute or the timestamp column")]
    UnknownStatAttribute(String),
    #[error("statistics are enabled but no attributes are configured")]
    NoStatAttributes,
    #[error("parameters can only be changed before fit or after reset")]
    AlreadyFitted,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("row {row}: expected {expected} attributes, found {found}")]
    SchemaMismatch { row: usize, expected: usize, found: usize },
    #[error("snapshot is inconsistent: {0}")]
    Snapshot(&'static str),
}
