use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::agent::{
    cr_update, cwai, cwi, cx_update, initiate_features, steady_state, Action, AgentProfile,
    AgentState, DecisionParams, GroupAgentState,
};
use super::config::SimConfig;
use crate::error::{Error, Result};
use crate::roles::{population_max, role_strengths, DomainActivity, DomainRole, RoleProfile};
use crate::society::{
    EntityId, IndexedGraph, InteractionEvent, InteractionLog, PairAccumulator, PsiConfig,
    RelationGraph, SocietySnapshot, Timestamp, DOMAIN,
};

/// Complete simulator state between steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub time: Timestamp,
    pub step: usize,
    pub agents: BTreeMap<EntityId, AgentState>,
    pub groups: Vec<GroupAgentState>,
    /// First-seen times of the initial population.
    pub known: BTreeMap<EntityId, Timestamp>,
    /// Synthetic events generated so far.
    pub log: InteractionLog,
    next_id: u64,
}

fn observed_activity(s: &SocietySnapshot, id: &EntityId) -> DomainActivity {
    if let Some(r) = s.roles.get(id) {
        return r.activity;
    }
    let mut a = DomainActivity::default();
    for role in DomainRole::ALL {
        *a.get_mut(role) = s.attributes.get(id, DOMAIN, role.as_str()).unwrap_or(0.0);
    }
    a
}

/// Per-step activity rates observed in the snapshot, dividing each entity's
/// window activity by the number of steps it was present in the window.
pub fn observed_rates(
    s: &SocietySnapshot,
    step_seconds: i64,
) -> BTreeMap<EntityId, DomainActivity> {
    s.entities
        .iter()
        .map(|id| {
            let seen = s.first_seen.get(id).copied().unwrap_or(s.window_start);
            let exposure = (s.time - seen.max(s.window_start)) as f64 / step_seconds as f64;
            let rates = observed_activity(s, id).scaled(1.0 / exposure.ceil().max(1.0));
            (id.clone(), rates)
        })
        .collect()
}

/// One agent per snapshot entity, with decision biases moment-matched to
/// the entity's observed per-step rates.
pub fn init_population(s: &SocietySnapshot, cfg: &SimConfig) -> Result<World> {
    cfg.validate()?;
    if s.entities.is_empty() {
        return Err(Error::EmptySnapshot);
    }
    let b = &cfg.behavior;
    let rates = observed_rates(s, cfg.step_seconds);
    let maxima = population_max(&rates);

    let mut outgoing: BTreeMap<&EntityId, BTreeMap<EntityId, PairAccumulator>> = BTreeMap::new();
    for e in s.relations.edges() {
        outgoing.entry(&e.initiator).or_default().insert(
            e.receiver.clone(),
            PairAccumulator::from_strength(&cfg.psi, e.strength, s.time, e.semantics.clone()),
        );
    }

    let mut agents = BTreeMap::new();
    for (id, r) in &rates {
        let relations = outgoing.remove(id).unwrap_or_default();
        let activity = steady_state(r, b);
        let x0 = initiate_features(&activity, relations.len(), 0, b);
        let profile = AgentProfile {
            activity,
            params: DecisionParams::fit(r, &x0, b),
        };
        let role_profile = s
            .roles
            .get(id)
            .map(|ra| ra.profile.clone())
            .unwrap_or_else(|| RoleProfile::from_strengths(role_strengths(r, &maxima)));
        let mut agent = AgentState::new(id.clone(), &profile, role_profile);
        agent.relation_count = relations.len();
        agent.relations = relations;
        agents.insert(id.clone(), agent);
    }

    let mut world = World {
        time: s.time,
        step: 0,
        agents,
        groups: s.groups.iter().cloned().map(GroupAgentState::new).collect(),
        known: s.first_seen.clone(),
        log: InteractionLog::new(),
        next_id: 0,
    };
    world.refresh_groups(&cfg.psi);
    Ok(world)
}

/// Choose a partner for agent `i`: with probability `1 - epsilon` a
/// two-hop candidate drawn proportionally to common-neighbour count,
/// otherwise (or when there is no such candidate) a uniform non-neighbour,
/// falling back to anyone but `i`. `None` when `i` is alone.
pub fn select_partner<R: Rng + ?Sized>(
    g: &IndexedGraph,
    i: usize,
    rng: &mut R,
    epsilon_explore: f64,
) -> Option<usize> {
    let n = g.len();
    if n < 2 {
        return None;
    }
    let explore = rng.random::<f64>() < epsilon_explore;
    if !explore {
        let mut foaf: BTreeMap<usize, usize> = BTreeMap::new();
        for z in g.neighbors(i) {
            for w in g.neighbors(z) {
                if w != i && !g.adjacent(i, w) {
                    *foaf.entry(w).or_insert(0) += 1;
                }
            }
        }
        let total: usize = foaf.values().sum();
        if total > 0 {
            let mut pick = rng.random_range(0..total);
            for (&w, &cn) in &foaf {
                if pick < cn {
                    return Some(w);
                }
                pick -= cn;
            }
        }
    }
    let strangers = n - 1 - g.degree(i);
    if strangers > 0 {
        let mut pick = rng.random_range(0..strangers);
        for w in (0..n).filter(|&w| w != i && !g.adjacent(i, w)) {
            if pick == 0 {
                return Some(w);
            }
            pick -= 1;
        }
    }
    let pick = rng.random_range(0..n - 1);
    Some(if pick >= i { pick + 1 } else { pick })
}

impl World {
    /// World at `time` holding `agents`, all known from `time` on, with no
    /// groups and an empty log.
    pub fn from_agents(time: Timestamp, agents: BTreeMap<EntityId, AgentState>) -> Self {
        World {
            time,
            step: 0,
            known: agents.keys().map(|id| (id.clone(), time)).collect(),
            agents,
            groups: Vec::new(),
            log: InteractionLog::new(),
            next_id: 0,
        }
    }

    pub fn population(&self) -> usize {
        self.agents.len()
    }

    /// Relations of every agent as one graph; every agent is a node.
    pub fn relation_graph(&self, psi: &PsiConfig, now: Timestamp) -> RelationGraph {
        let mut g = RelationGraph::new(now);
        for (id, a) in &self.agents {
            g.add_node(id.clone());
            for e in a.relation_view(psi, now) {
                g.insert_edge(e);
            }
        }
        g
    }

    fn fresh_id(&mut self) -> EntityId {
        loop {
            let id = EntityId::new(format!("sim-{:06}", self.next_id));
            self.next_id += 1;
            if !self.agents.contains_key(&id) && !self.known.contains_key(&id) {
                return id;
            }
        }
    }

    fn spawn<R: Rng + ?Sized>(&mut self, cfg: &SimConfig, rng: &mut R) -> Result<()> {
        let arrival = &cfg.arrival;
        if arrival.rate <= 0.0 || arrival.profiles.is_empty() {
            return Ok(());
        }
        let poisson = Poisson::new(arrival.rate)
            .map_err(|e| Error::BadConfig(format!("arrival rate: {e}")))?;
        let count = poisson.sample(rng) as usize;
        let maxima = self
            .agents
            .values()
            .fold(DomainActivity::default(), |m, a| m.max(&a.activity));
        for _ in 0..count {
            let profile = &arrival.profiles[rng.random_range(0..arrival.profiles.len())];
            let id = self.fresh_id();
            let role = RoleProfile::from_strengths(role_strengths(
                &profile.activity,
                &maxima.max(&profile.activity),
            ));
            self.agents
                .insert(id.clone(), AgentState::new(id, profile, role));
        }
        Ok(())
    }

    /// Advance one step: arrivals, actions, then attribute and relation
    /// updates, then group aggregates.
    pub fn step<R: Rng + ?Sized>(&mut self, cfg: &SimConfig, rng: &mut R) -> Result<()> {
        cfg.validate()?;
        let b = &cfg.behavior;
        let psi = &cfg.psi;
        let start = self.time;
        let end = start + cfg.step_seconds;

        self.spawn(cfg, rng)?;
        for a in self.agents.values_mut() {
            a.relation_count = a.count_relations(psi, start);
            a.load = 0.0;
        }

        let graph = self.relation_graph(psi, start).indexed();
        let ids: Vec<EntityId> = self.agents.keys().cloned().collect();
        debug_assert_eq!(ids, graph.ids);

        let mut events = Vec::new();
        for (i, id) in ids.iter().enumerate() {
            let will = cwi(&self.agents[id], self.step, b);
            for action in Action::ALL {
                let p = will.initiate[&action];
                for _ in 0..b.attempts {
                    if rng.random::<f64>() >= p {
                        continue;
                    }
                    let Some(j) = select_partner(&graph, i, rng, b.epsilon_explore) else {
                        continue;
                    };
                    let partner = &ids[j];
                    let receiver = &self.agents[partner];
                    let relation = receiver.relation_strength(id, psi, start);
                    let accept = cwai(receiver, &self.agents[id], action, relation);
                    if rng.random::<f64>() >= accept {
                        continue;
                    }
                    let kinds = action.event_kinds();
                    for &kind in kinds {
                        events.push(InteractionEvent {
                            time: start,
                            initiator: id.clone(),
                            receiver: partner.clone(),
                            kind,
                            strength: b.event_strength,
                            tags: Vec::new(),
                        });
                    }
                    let n = kinds.len() as f64;
                    if let Some(r) = self.agents.get_mut(partner) {
                        r.load += n;
                    }
                    if let Some(a) = self.agents.get_mut(id) {
                        a.load += n;
                    }
                }
            }
        }

        events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut own: BTreeMap<EntityId, Vec<InteractionEvent>> = BTreeMap::new();
        for e in &events {
            own.entry(e.initiator.clone()).or_default().push(e.clone());
        }
        for e in events {
            self.log.ingest(e)?;
        }
        for (id, a) in self.agents.iter_mut() {
            let mine = own.get(id).map(Vec::as_slice).unwrap_or(&[]);
            cx_update(a, mine, b.rho);
            cr_update(a, mine, psi, b.buffer_capacity);
        }

        self.time = end;
        self.step += 1;
        self.refresh_groups(psi);
        Ok(())
    }

    /// Recompute group aggregates and inter-group relation weights.
    fn refresh_groups(&mut self, psi: &PsiConfig) {
        if self.groups.is_empty() {
            return;
        }
        let graph = self.relation_graph(psi, self.time).indexed();
        let mut member_of: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (gi, g) in self.groups.iter().enumerate() {
            for m in &g.group.members {
                if let Some(i) = graph.index_of(m) {
                    member_of.entry(i).or_default().insert(gi);
                }
            }
        }
        let count = self.groups.len();
        for gi in 0..count {
            let members: Vec<&EntityId> = self.groups[gi]
                .group
                .members
                .iter()
                .filter(|m| self.agents.contains_key(*m))
                .collect();
            let mut aggregate = BTreeMap::new();
            for role in DomainRole::ALL {
                let sum: f64 = members
                    .iter()
                    .map(|m| self.agents[*m].activity.get(role))
                    .sum();
                let mean = if members.is_empty() {
                    0.0
                } else {
                    sum / members.len() as f64
                };
                aggregate.insert(role, mean);
            }
            let mut relations: BTreeMap<String, f64> = BTreeMap::new();
            for m in &members {
                let Some(u) = graph.index_of(m) else { continue };
                for (v, w) in &graph.und[u] {
                    for &other in member_of.get(v).into_iter().flatten() {
                        if other != gi {
                            *relations
                                .entry(self.groups[other].group.id.clone())
                                .or_insert(0.0) += w;
                        }
                    }
                }
            }
            self.groups[gi].aggregate_attributes = aggregate;
            self.groups[gi].relations = relations;
        }
    }
}
