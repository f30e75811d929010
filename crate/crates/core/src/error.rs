use thiserror::Error;

use crate::rational::Rational;

/// Errors raised by constructors, builders and file ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: component {component:?} is separated from {other:?}")]
    Disconnected {
        component: Vec<String>,
        other: String,
    },
    #[error("edge {u} -- {v} has nonpositive weight {weight}")]
    NonpositiveWeight {
        u: String,
        v: String,
        weight: Rational,
    },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("unknown point label `{0}`")]
    UnknownLabel(String),
    #[error("point index {index} out of range for a space of {len} points")]
    PointOutOfRange { index: usize, len: usize },
    #[error("empty point set where a nonempty one is required: {0}")]
    EmptySet(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid annulus [{a}, {b}): lower bound must be nonnegative and below the upper bound")]
    InvalidAnnulus { a: Rational, b: Rational },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("coordinate {coord} outside the declared factor range 1..={factors}")]
    CoordinateOutOfRange { coord: usize, factors: usize },
    #[error("reindex map is not a bijection: {0}")]
    NotBijective(String),
    #[error("witness provider failed: {0}")]
    Provider(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("external input required: {0}")]
    ExternalInputRequired(String),
    #[error("cannot bound preimage mesh: {0}")]
    PreimageMesh(String),
    #[error("refused: family {index} was built at separation {built} but needs at least {needed}")]
    SeparationTooSmall {
        index: usize,
        built: Rational,
        needed: Rational,
    },
    #[error("block function K is not defined at index {0}")]
    BlockIndex(usize),
    #[error("invalid embedding: {0}")]
    Embedding(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
