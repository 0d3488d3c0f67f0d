use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::event::{EntityId, InteractionEvent, TimeWindow, Timestamp};
use super::graph::RelationGraph;
use super::log::{entities_of, first_seen_of, InteractionLog};
use super::psi::{derive_relations, PsiConfig};
use crate::communities::{self, Group};
use crate::error::{Error, Result};
use crate::roles::{self, DomainActivity, RoleAssignment, RoleDistribution, RuleTable};
use crate::sna::{self, Metric, SnaParams};

/// Attribute namespace for observed domain activity.
pub const DOMAIN: &str = "domain";
/// Attribute namespace for derived network measures.
pub const SNA: &str = "sna";

/// Real-valued attributes per entity, keyed `"<namespace>:<name>"`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeTable {
    values: BTreeMap<EntityId, BTreeMap<String, f64>>,
}

impl AttributeTable {
    pub fn set(&mut self, id: &EntityId, namespace: &str, name: &str, value: f64) {
        self.values
            .entry(id.clone())
            .or_default()
            .insert(format!("{namespace}:{name}"), value);
    }

    pub fn get(&self, id: &EntityId, namespace: &str, name: &str) -> Option<f64> {
        self.values
            .get(id)?
            .get(&format!("{namespace}:{name}"))
            .copied()
    }

    /// All `(entity, name, value)` triples of one namespace.
    pub fn namespace(&self, namespace: &str) -> Vec<(&EntityId, &str, f64)> {
        let prefix = format!("{namespace}:");
        self.values
            .iter()
            .flat_map(|(id, attrs)| {
                let prefix = prefix.clone();
                attrs.iter().filter_map(move |(k, v)| {
                    k.strip_prefix(prefix.as_str()).map(|name| (id, name, *v))
                })
            })
            .collect()
    }

    pub fn clear_namespace(&mut self, namespace: &str) {
        let prefix = format!("{namespace}:");
        for attrs in self.values.values_mut() {
            attrs.retain(|k, _| !k.starts_with(&prefix));
        }
        self.values.retain(|_, attrs| !attrs.is_empty());
    }

    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.values.keys()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnapshotConfig {
    /// Seconds of history feeding relations, groups and roles.
    pub lookback: i64,
    pub psi: PsiConfig,
    pub cpm_k: usize,
    pub rules: RuleTable,
    pub sna: SnaParams,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        SnapshotConfig {
            lookback: 7 * 24 * 3600,
            psi: PsiConfig::default(),
            cpm_k: 3,
            rules: RuleTable::default(),
            sna: SnaParams::default(),
        }
    }
}

impl SnapshotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lookback <= 0 {
            return Err(Error::BadConfig(format!(
                "lookback must be positive, got {}",
                self.lookback
            )));
        }
        if self.cpm_k < 3 {
            return Err(Error::BadK(self.cpm_k));
        }
        self.psi.validate()?;
        self.rules.validate()?;
        self.sna.validate()
    }
}

/// State of the society at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocietySnapshot {
    pub time: Timestamp,
    /// Start of the analysed window `[window_start, time)`.
    pub window_start: Timestamp,
    pub entities: BTreeSet<EntityId>,
    /// Earliest observation of every entity.
    pub first_seen: BTreeMap<EntityId, Timestamp>,
    pub attributes: AttributeTable,
    pub relations: RelationGraph,
    pub groups: Vec<Group>,
    pub roles: BTreeMap<EntityId, RoleAssignment>,
}

impl SocietySnapshot {
    pub fn empty(time: Timestamp) -> Self {
        SocietySnapshot {
            time,
            window_start: time,
            entities: BTreeSet::new(),
            first_seen: BTreeMap::new(),
            attributes: AttributeTable::default(),
            relations: RelationGraph::new(time),
            groups: Vec::new(),
            roles: BTreeMap::new(),
        }
    }

    pub fn role_distribution(&self) -> Result<RoleDistribution> {
        roles::role_distribution(self.roles.values().map(|r| r.category))
    }

    /// JSON with sorted keys and sorted entity collections.
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)?)
    }

    /// Checks the cross-reference invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let known = |id: &EntityId| {
            if self.entities.contains(id) {
                Ok(())
            } else {
                Err(Error::UnknownEntity(id.clone()))
            }
        };
        for e in self.relations.edges() {
            known(&e.initiator)?;
            known(&e.receiver)?;
        }
        for g in &self.groups {
            g.members.iter().try_for_each(known)?;
        }
        self.roles.keys().try_for_each(known)?;
        self.attributes.entities().try_for_each(known)
    }
}

/// Assemble the society state at `t` from events in `[t - lookback, t)`.
///
/// The population is every entity appearing in the log before `t`.
pub fn snapshot(
    log: &InteractionLog,
    t: Timestamp,
    cfg: &SnapshotConfig,
) -> Result<SocietySnapshot> {
    snapshot_with_population(log, t, cfg, &BTreeMap::new())
}

/// Like [`snapshot`], with extra known entities (and their first-seen
/// times) that may be absent from `log`.
pub fn snapshot_with_population(
    log: &InteractionLog,
    t: Timestamp,
    cfg: &SnapshotConfig,
    known: &BTreeMap<EntityId, Timestamp>,
) -> Result<SocietySnapshot> {
    cfg.validate()?;
    let history = log.before(t);
    let mut first_seen = known.clone();
    for (id, seen) in first_seen_of(history) {
        let slot = first_seen.entry(id).or_insert(seen);
        *slot = (*slot).min(seen);
    }
    let entities: BTreeSet<EntityId> = first_seen.keys().cloned().collect();
    let window = TimeWindow {
        start: t.saturating_sub(cfg.lookback),
        end: t,
    };
    let events = log.window_events(window);
    analyze_window(entities, first_seen, events, window, cfg)
}

/// Build a snapshot for a fixed population from the events of one window.
pub fn analyze_window(
    entities: BTreeSet<EntityId>,
    first_seen: BTreeMap<EntityId, Timestamp>,
    events: &[InteractionEvent],
    window: TimeWindow,
    cfg: &SnapshotConfig,
) -> Result<SocietySnapshot> {
    debug_assert!(entities_of(events).is_subset(&entities));
    let t = window.end;
    let mut relations = derive_relations(events, &cfg.psi, t)?;
    for id in &entities {
        relations.add_node(id.clone());
    }

    let mut snap = SocietySnapshot {
        time: t,
        window_start: window.start,
        entities,
        first_seen,
        attributes: AttributeTable::default(),
        relations,
        groups: Vec::new(),
        roles: BTreeMap::new(),
    };
    sna::annotate_sna(&mut snap, &cfg.sna)?;

    let groups = communities::detect_groups(&snap.relations, cfg.cpm_k, events, window)?;
    snap.groups = groups;

    let betweenness = sna_column(&snap, Metric::Betweenness);
    let closeness = sna_column(&snap, Metric::Closeness);
    let activity = roles::population_activity(&snap.entities, events);
    snap.roles = roles::assign_roles(&activity, &closeness, &betweenness, &cfg.rules)?;
    for (id, a) in &activity {
        write_domain(&mut snap.attributes, id, a);
    }
    Ok(snap)
}

fn sna_column(s: &SocietySnapshot, metric: Metric) -> BTreeMap<EntityId, f64> {
    s.entities
        .iter()
        .map(|id| {
            let v = s.attributes.get(id, SNA, metric.as_str()).unwrap_or(0.0);
            (id.clone(), v)
        })
        .collect()
}

pub(crate) fn write_domain(attrs: &mut AttributeTable, id: &EntityId, a: &DomainActivity) {
    for (role, v) in a.iter() {
        attrs.set(id, DOMAIN, role.as_str(), v);
    }
}

/// Add newcomers with their initial domain attributes. Newcomers start
/// with no relations or groups and hold the Observer category until the
/// next analysis.
pub fn add_entities(
    s: &SocietySnapshot,
    newcomers: &BTreeMap<EntityId, DomainActivity>,
) -> Result<SocietySnapshot> {
    if let Some(dup) = newcomers.keys().find(|id| s.entities.contains(*id)) {
        return Err(Error::DuplicateEntity(dup.clone()));
    }
    let mut out = s.clone();
    for (id, a) in newcomers {
        out.entities.insert(id.clone());
        out.first_seen.insert(id.clone(), s.time);
        out.relations.add_node(id.clone());
        write_domain(&mut out.attributes, id, a);
        out.roles.insert(id.clone(), RoleAssignment::observer(*a));
    }
    Ok(out)
}
