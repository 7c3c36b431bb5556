use thiserror::Error;

use crate::graph::Vertex;
use crate::oracles::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(Vertex, Vertex, &'static str),

    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("graph has {n} vertices, above the exhaustive limit of {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("unknown graph family `{0}`")]
    UnknownFamily(String),

    #[error("family `{family}` needs an even vertex count, got {n}")]
    OddVertexCount { family: &'static str, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {0} is not in the rank vector")]
    NotInDomain(Vertex),

    #[error("target ({bucket}, {position}) is out of range: {reason}")]
    TargetOutOfRange {
        bucket: u32,
        position: u32,
        reason: String,
    },

    #[error("enumerating {count} rank vectors exceeds the budget of {budget}")]
    EnumerationLimit { count: u128, budget: u128 },

    #[error("order domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("coloring error: {0}")]
    Coloring(String),

    #[error("invalid price table: {0}")]
    PriceTable(String),

    #[error("bucket {bucket} outside 1..={max}")]
    BucketRange { bucket: u32, max: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("claim violated: {0}")]
    Violation(Box<Violation>),
}
