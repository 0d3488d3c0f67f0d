//! Turning raw interactions into weighted relations.
//!
//! Every ordered pair `(u, v)` accumulates
//! `w(u, v) = Σ c · exp(-decay · (now - t))` over its events. A relation
//! exists once `w >= threshold` and has strength `w / (w + saturation)`.
//! The same [`PairAccumulator`] backs both the society-wide derivation and
//! the agent-local relation update in the simulator, so the two agree
//! exactly on identical event streams.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::event::{EntityId, InteractionEvent, Timestamp};
use super::graph::{RelationEdge, RelationGraph, TokenCounts};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiConfig {
    /// Exponential decay rate per second (λ).
    pub decay: f64,
    /// Minimum accumulated weight for a relation to exist (θ_min).
    pub threshold: f64,
    /// Half-saturation weight (κ).
    pub saturation: f64,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig {
            decay: 0.0,
            threshold: 2.0,
            saturation: 1.0,
        }
    }
}

impl PsiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay >= 0.0) {
            return Err(Error::BadConfig(format!(
                "psi decay must be >= 0, got {}",
                self.decay
            )));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::BadConfig(format!(
                "psi threshold must be > 0, got {}",
                self.threshold
            )));
        }
        if !(self.saturation > 0.0) || !self.saturation.is_finite() {
            return Err(Error::BadConfig(format!(
                "psi saturation must be > 0, got {}",
                self.saturation
            )));
        }
        Ok(())
    }

    fn decay_factor(&self, dt: i64) -> f64 {
        if dt == 0 || self.decay == 0.0 {
            1.0
        } else {
            (-self.decay * dt as f64).exp()
        }
    }

    /// Relation strength for an accumulated weight, or `None` below threshold.
    pub fn strength(&self, weight: f64) -> Option<f64> {
        (weight >= self.threshold).then(|| weight / (weight + self.saturation))
    }
}

/// Running decayed weight and merged tag counts of one ordered pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairAccumulator {
    weight: f64,
    as_of: Option<Timestamp>,
    semantics: TokenCounts,
}

impl PairAccumulator {
    /// Accumulator holding `weight` as of `t`.
    pub fn seeded(weight: f64, t: Timestamp, semantics: TokenCounts) -> Self {
        PairAccumulator {
            weight,
            as_of: Some(t),
            semantics,
        }
    }

    /// Accumulator for an existing relation of strength `s` at `t`
    /// (inverse of `w / (w + saturation)`, never below the threshold).
    pub fn from_strength(cfg: &PsiConfig, s: f64, t: Timestamp, semantics: TokenCounts) -> Self {
        let s = s.clamp(0.0, 1.0 - f64::EPSILON);
        let w = (cfg.saturation * s / (1.0 - s)).max(cfg.threshold);
        Self::seeded(w, t, semantics)
    }

    pub fn add(&mut self, cfg: &PsiConfig, e: &InteractionEvent) {
        match self.as_of {
            Some(as_of) if e.time < as_of => {
                self.weight += e.strength * cfg.decay_factor(as_of - e.time);
            }
            Some(as_of) => {
                self.weight = self.weight * cfg.decay_factor(e.time - as_of) + e.strength;
                self.as_of = Some(e.time);
            }
            None => {
                self.weight = e.strength;
                self.as_of = Some(e.time);
            }
        }
        for tag in &e.tags {
            *self.semantics.entry(tag.clone()).or_insert(0) += 1;
        }
    }

    /// Accumulated weight evaluated at `now`.
    pub fn weight_at(&self, cfg: &PsiConfig, now: Timestamp) -> f64 {
        let Some(as_of) = self.as_of else {
            return 0.0;
        };
        let w = self.weight * cfg.decay_factor(now - as_of);
        if w.is_nan() {
            0.0
        } else {
            w
        }
    }

    pub fn semantics(&self) -> &TokenCounts {
        &self.semantics
    }

    pub fn to_edge(
        &self,
        cfg: &PsiConfig,
        now: Timestamp,
        initiator: &EntityId,
        receiver: &EntityId,
    ) -> Option<RelationEdge> {
        let strength = cfg.strength(self.weight_at(cfg, now))?;
        Some(RelationEdge {
            initiator: initiator.clone(),
            receiver: receiver.clone(),
            strength,
            semantics: self.semantics.clone(),
        })
    }
}

/// Derive the relation graph implied by `events` as seen at `now`.
///
/// Every endpoint of every event becomes a node of the result, whether or
/// not one of its pairs passes the threshold.
pub fn derive_relations(
    events: &[InteractionEvent],
    cfg: &PsiConfig,
    now: Timestamp,
) -> Result<RelationGraph> {
    cfg.validate()?;
    let mut pairs: BTreeMap<(EntityId, EntityId), PairAccumulator> = BTreeMap::new();
    for e in events {
        pairs
            .entry((e.initiator.clone(), e.receiver.clone()))
            .or_default()
            .add(cfg, e);
    }
    let mut graph = RelationGraph::new(now);
    for ((u, v), acc) in &pairs {
        graph.add_node(u.clone());
        graph.add_node(v.clone());
        if let Some(edge) = acc.to_edge(cfg, now, u, v) {
            graph.insert_edge(edge);
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::society::EventKind;

    fn ev(t: Timestamp, a: &str, b: &str, c: f64) -> InteractionEvent {
        InteractionEvent::new(t, a, b, EventKind::FriendRequest, c)
    }

    fn cfg(decay: f64, threshold: f64, saturation: f64) -> PsiConfig {
        PsiConfig {
            decay,
            threshold,
            saturation,
        }
    }

    #[test]
    fn three_unit_events_saturate_to_three_quarters() {
        let events = vec![
            ev(1, "a", "b", 1.0),
            ev(2, "a", "b", 1.0),
            ev(3, "a", "b", 1.0),
        ];
        let g = derive_relations(&events, &cfg(0.0, 2.0, 1.0), 10).unwrap();
        let e = g.edge(&"a".into(), &"b".into()).unwrap();
        assert_eq!(e.strength, 0.75);
        assert!(g.edge(&"b".into(), &"a".into()).is_none());
    }

    #[test]
    fn below_threshold_yields_no_edge() {
        let g = derive_relations(&[ev(1, "a", "b", 1.0)], &PsiConfig::default(), 10).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn full_decay_empties_graph() {
        let events = vec![ev(1, "a", "b", 5.0), ev(2, "a", "b", 5.0)];
        let g = derive_relations(&events, &cfg(f64::INFINITY, 2.0, 1.0), 1_000_000).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn decay_matches_direct_sum() {
        let events = vec![
            ev(0, "a", "b", 2.0),
            ev(50, "a", "b", 1.0),
            ev(100, "a", "b", 0.5),
        ];
        let c = cfg(0.01, 0.1, 1.0);
        let now = 300;
        let direct: f64 = events
            .iter()
            .map(|e| e.strength * (-0.01 * (now - e.time) as f64).exp())
            .sum();
        let g = derive_relations(&events, &c, now).unwrap();
        let s = g.edge(&"a".into(), &"b".into()).unwrap().strength;
        assert!((s - direct / (direct + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn semantics_merge_tags() {
        let events = vec![
            ev(1, "a", "b", 1.0).with_tags(["travel", "music"]),
            ev(2, "a", "b", 1.0).with_tags(["travel"]),
        ];
        let g = derive_relations(&events, &PsiConfig::default(), 10).unwrap();
        let sem = &g.edge(&"a".into(), &"b".into()).unwrap().semantics;
        assert_eq!(sem.get("travel"), Some(&2));
        assert_eq!(sem.get("music"), Some(&1));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(matches!(
            derive_relations(&[], &cfg(0.0, 0.0, 1.0), 0),
            Err(Error::BadConfig(_))
        ));
        assert!(matches!(
            derive_relations(&[], &cfg(0.0, 1.0, -1.0), 0),
            Err(Error::BadConfig(_))
        ));
    }
}
