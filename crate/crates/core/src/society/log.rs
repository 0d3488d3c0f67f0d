use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::event::{EntityId, InteractionEvent, TimeWindow, Timestamp};
use crate::error::{Error, Result};

/// Append-only interaction history, sorted by time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InteractionLog {
    events: Vec<InteractionEvent>,
}

impl InteractionLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bulk load: validates every event and sorts stably by
    /// `(time, initiator, receiver, kind)`.
    pub fn from_events(mut events: Vec<InteractionEvent>) -> Result<Self> {
        for e in &events {
            e.validate()?;
        }
        events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Ok(InteractionLog { events })
    }

    /// Streaming append. The event must not precede the current tail.
    pub fn ingest(&mut self, e: InteractionEvent) -> Result<()> {
        e.validate()?;
        if let Some(last) = self.events.last() {
            if e.time < last.time {
                return Err(Error::OrderViolation {
                    last: last.time,
                    got: e.time,
                });
            }
        }
        self.events.push(e);
        Ok(())
    }

    pub fn events(&self) -> &[InteractionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Time span `(first, last)` of the log.
    pub fn span(&self) -> Option<(Timestamp, Timestamp)> {
        Some((self.events.first()?.time, self.events.last()?.time))
    }

    /// Events with `w.start <= time < w.end`, in log order.
    pub fn window_events(&self, w: TimeWindow) -> &[InteractionEvent] {
        let lo = self.events.partition_point(|e| e.time < w.start);
        let hi = self.events.partition_point(|e| e.time < w.end);
        &self.events[lo..hi.max(lo)]
    }

    /// Events strictly before `t`.
    pub fn before(&self, t: Timestamp) -> &[InteractionEvent] {
        let hi = self.events.partition_point(|e| e.time < t);
        &self.events[..hi]
    }

    /// Events where `j` is initiator or receiver.
    pub fn entity_events(&self, j: &EntityId) -> Vec<&InteractionEvent> {
        self.events.iter().filter(|e| e.involves(j)).collect()
    }

    /// Every entity named by the log.
    pub fn entities(&self) -> BTreeSet<EntityId> {
        entities_of(&self.events)
    }

    /// Earliest appearance of every entity.
    pub fn first_seen(&self) -> BTreeMap<EntityId, Timestamp> {
        first_seen_of(&self.events)
    }

    /// Concatenation with a later log. Fails if `later` starts before this log ends.
    pub fn extended(&self, later: &InteractionLog) -> Result<InteractionLog> {
        let mut out = self.clone();
        for e in later.events() {
            out.ingest(e.clone())?;
        }
        Ok(out)
    }
}

pub(crate) fn entities_of(events: &[InteractionEvent]) -> BTreeSet<EntityId> {
    events
        .iter()
        .flat_map(|e| [e.initiator.clone(), e.receiver.clone()])
        .collect()
}

pub(crate) fn first_seen_of(events: &[InteractionEvent]) -> BTreeMap<EntityId, Timestamp> {
    let mut seen = BTreeMap::new();
    for e in events {
        for id in [&e.initiator, &e.receiver] {
            seen.entry(id.clone()).or_insert(e.time);
        }
    }
    seen
}
