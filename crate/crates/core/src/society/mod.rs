//! The society model: entities, interactions, relations and snapshots.

mod event;
mod graph;
pub mod io;
mod log;
mod psi;
mod snapshot;

pub use event::{EntityId, EventKind, InteractionEvent, TimeWindow, Timestamp};
pub use graph::{GraphMode, IndexedGraph, RelationEdge, RelationGraph, TokenCounts};
pub use log::InteractionLog;
pub use psi::{derive_relations, PairAccumulator, PsiConfig};
pub use snapshot::{
    add_entities, analyze_window, snapshot, snapshot_with_population, AttributeTable,
    SnapshotConfig, SocietySnapshot, DOMAIN, SNA,
};
