//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(String),

    #[error("dangling endpoint: edge `{edge}` references unknown vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("graph has a cycle but the operation requires an acyclic graph")]
    CycleNotAllowed,

    #[error("operation requires a row-finite graph")]
    NotRowFinite,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Condition (K) fails (witness vertex `{witness}`); ideals may be non-gauge-invariant")]
    ConditionKFails { witness: String },

    #[error("degenerate inclusion: pair ({u}, {w}) has exactly one connecting path")]
    DegenerateInclusion { u: String, w: String },

    #[error("tail not collapsible: {0}")]
    NotCollapsible(String),

    #[error("input outside supported presentations: {0}")]
    UnsupportedInput(String),

    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
