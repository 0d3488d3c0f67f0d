use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the Unix epoch.
pub type Timestamp = i64;

/// Stable identifier of a society member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_owned())
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        EntityId(s)
    }
}

/// Half-open interval `[start, end)` of timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl TimeWindow {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self> {
        if start >= end {
            return Err(Error::BadWindow { start, end });
        }
        Ok(TimeWindow { start, end })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }

    pub fn duration(&self) -> i64 {
        self.end - self.start
    }
}

/// Kind of a logged interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FriendRequest,
    GroupPost,
    SurfRequest,
    HostOffer,
    TravelSearch,
    StayHosted,
    StayGuest,
}

impl EventKind {
    pub const ALL: [EventKind; 7] = [
        EventKind::FriendRequest,
        EventKind::GroupPost,
        EventKind::SurfRequest,
        EventKind::HostOffer,
        EventKind::TravelSearch,
        EventKind::StayHosted,
        EventKind::StayGuest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::FriendRequest => "friend_request",
            EventKind::GroupPost => "group_post",
            EventKind::SurfRequest => "surf_request",
            EventKind::HostOffer => "host_offer",
            EventKind::TravelSearch => "travel_search",
            EventKind::StayHosted => "stay_hosted",
            EventKind::StayGuest => "stay_guest",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown event kind {s:?}")))
    }
}

/// One timed, typed, weighted influence of `initiator` on `receiver`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub time: Timestamp,
    pub initiator: EntityId,
    pub receiver: EntityId,
    pub kind: EventKind,
    pub strength: f64,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl InteractionEvent {
    pub fn new(
        time: Timestamp,
        initiator: impl Into<EntityId>,
        receiver: impl Into<EntityId>,
        kind: EventKind,
        strength: f64,
    ) -> Self {
        InteractionEvent {
            time,
            initiator: initiator.into(),
            receiver: receiver.into(),
            kind,
            strength,
            tags: Vec::new(),
        }
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= 0.0) || !self.strength.is_finite() {
            return Err(Error::NegativeStrength(self.strength));
        }
        if self.initiator == self.receiver {
            return Err(Error::SelfLoop(self.initiator.clone()));
        }
        Ok(())
    }

    pub fn involves(&self, id: &EntityId) -> bool {
        &self.initiator == id || &self.receiver == id
    }

    /// Canonical ordering key used by bulk loading.
    pub(crate) fn sort_key(&self) -> (Timestamp, &EntityId, &EntityId, EventKind) {
        (self.time, &self.initiator, &self.receiver, self.kind)
    }
}
