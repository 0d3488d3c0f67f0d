use thiserror::Error;

use crate::society::{EntityId, Timestamp};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("interaction strength must be non-negative and finite, got {0}")]
    NegativeStrength(f64),
    #[error("self-interaction on entity {0}")]
    SelfLoop(EntityId),
    #[error("event at t={got} precedes the last logged event at t={last}")]
    OrderViolation { last: Timestamp, got: Timestamp },
    #[error("invalid time window [{start}, {end})")]
    BadWindow { start: Timestamp, end: Timestamp },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("entity {0} already exists")]
    DuplicateEntity(EntityId),
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("clique size must be at least 3, got {0}")]
    BadK(usize),
    #[error("entity {entity} is not a member of group {group}")]
    NotMember { entity: EntityId, group: String },
    #[error("group {0} has fewer than two members")]
    TooSmall(String),
    #[error("membership history needs at least two states")]
    TooShort,
    #[error("test edge set is empty")]
    EmptyTestSet,
    #[error("role thresholds are invalid: {0}")]
    BadThresholds(String),
    #[error("population is empty")]
    EmptyPopulation,
    #[error("snapshot has no entities")]
    EmptySnapshot,
    #[error("distributions are over different categories")]
    CategoryMismatch,
    #[error("no entities first seen after t={0}")]
    EmptyCohort(Timestamp),
    #[error("split at t={0} leaves an empty configuration or holdout period")]
    DegenerateSplit(Timestamp),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input data rather than bad settings.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::BadConfig(_) | Error::BadThresholds(_) | Error::BadK(_)
        )
    }
}
