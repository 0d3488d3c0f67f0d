//! Entity and group agents and their decision functions.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::config::BehaviorParams;
use crate::communities::Group;
use crate::roles::{DomainActivity, DomainRole, RoleProfile};
use crate::society::{
    EntityId, EventKind, InteractionEvent, PairAccumulator, PsiConfig, RelationEdge, Timestamp,
};

/// Things an agent may do in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Acquaintance,
    CommonTravel,
    Lodge,
    Visit,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::Acquaintance,
        Action::CommonTravel,
        Action::Lodge,
        Action::Visit,
    ];

    /// Events logged, initiator to partner, when the partner accepts.
    pub fn event_kinds(self) -> &'static [EventKind] {
        match self {
            Action::Acquaintance => &[EventKind::FriendRequest],
            Action::CommonTravel => &[EventKind::TravelSearch],
            Action::Lodge => &[EventKind::HostOffer, EventKind::StayHosted],
            Action::Visit => &[EventKind::SurfRequest, EventKind::StayGuest],
        }
    }

    /// Domain attribute fed by this action.
    pub fn attribute(self) -> DomainRole {
        match self {
            Action::Acquaintance => DomainRole::Friendsmaker,
            Action::CommonTravel => DomainRole::Traveller,
            Action::Lodge => DomainRole::Host,
            Action::Visit => DomainRole::Surfer,
        }
    }
}

/// Initiation features: five scaled activities, log relation count, buffer fill.
pub const INITIATE_FEATURES: usize = 7;
/// Acceptance features: relation strength to the proposer, events this step.
pub const ACCEPT_FEATURES: usize = 2;

pub fn logistic(z: f64) -> f64 {
    if z.is_nan() {
        return 0.5;
    }
    1.0 / (1.0 + (-z).exp())
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Logistic {
    pub fn prob(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        let z: f64 = self.bias + self.weights.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
        logistic(z).clamp(0.0, 1.0)
    }

    pub fn linear(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, x)| w * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionParams {
    pub initiate: BTreeMap<Action, Logistic>,
    pub accept: Logistic,
}

impl DecisionParams {
    /// Default weights with biases fitted to `rates` (expected domain
    /// activity per step) at features `x0`.
    pub fn fit(rates: &DomainActivity, x0: &[f64], b: &BehaviorParams) -> Self {
        let accept = Logistic {
            weights: vec![b.accept_relation_weight, b.accept_load_weight],
            bias: b.accept_bias,
        };
        let expected_accept = logistic(b.accept_bias);
        let initiate = Action::ALL
            .into_iter()
            .map(|action| {
                let mut weights = vec![0.0; INITIATE_FEATURES];
                weights[action.attribute() as usize] = b.self_weight;
                weights[5] = b.relation_weight;
                weights[6] = b.recency_weight;
                let per_action = action.event_kinds().len() as f64 * b.event_strength;
                let target = b.action_scale * rates.get(action.attribute())
                    / (per_action * b.attempts as f64 * expected_accept);
                let p = target.clamp(b.min_prob, b.max_prob);
                let mut model = Logistic { weights, bias: 0.0 };
                model.bias = logit(p) - model.linear(x0);
                (action, model)
            })
            .collect();
        DecisionParams { initiate, accept }
    }

    /// Parameters that never initiate anything.
    pub fn inert(b: &BehaviorParams) -> Self {
        let mut p = Self::fit(&DomainActivity::default(), &[0.0; INITIATE_FEATURES], b);
        for m in p.initiate.values_mut() {
            m.bias = f64::NEG_INFINITY;
        }
        p
    }
}

/// Starting point for a spawned agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub activity: DomainActivity,
    pub params: DecisionParams,
}

impl AgentProfile {
    /// Profile reproducing `rates` for a newcomer with no relations.
    pub fn from_rates(rates: &DomainActivity, b: &BehaviorParams) -> Self {
        let activity = steady_state(rates, b);
        let x0 = initiate_features(&activity, 0, 0, b);
        AgentProfile {
            activity,
            params: DecisionParams::fit(rates, &x0, b),
        }
    }
}

/// CX level reached when `rates` repeat every step.
pub fn steady_state(rates: &DomainActivity, b: &BehaviorParams) -> DomainActivity {
    rates.scaled(1.0 / (1.0 - b.rho))
}

pub fn initiate_features(
    activity: &DomainActivity,
    relation_count: usize,
    recent: usize,
    b: &BehaviorParams,
) -> Vec<f64> {
    let mut x: Vec<f64> = activity
        .iter()
        .map(|(_, v)| v * (1.0 - b.rho) / b.feature_scale)
        .collect();
    x.push((1.0 + relation_count as f64).ln());
    x.push(recent as f64 / b.buffer_capacity.max(1) as f64);
    x
}

/// Willingness to initiate each action, plus baseline acceptance of a
/// stranger at the current load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WillingnessVector {
    pub initiate: BTreeMap<Action, f64>,
    pub acceptance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: EntityId,
    /// Exponentially smoothed domain activity.
    pub activity: DomainActivity,
    /// Free-form extra attributes.
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
    pub role_profile: RoleProfile,
    /// Outgoing relation accumulators keyed by partner.
    pub relations: BTreeMap<EntityId, PairAccumulator>,
    pub recent_events: VecDeque<InteractionEvent>,
    pub params: DecisionParams,
    /// Events involving this agent so far in the current step.
    pub load: f64,
    /// Relation count cached at the start of the step.
    pub relation_count: usize,
}

impl AgentState {
    pub fn new(id: EntityId, profile: &AgentProfile, role_profile: RoleProfile) -> Self {
        AgentState {
            id,
            activity: profile.activity,
            extra: BTreeMap::new(),
            role_profile,
            relations: BTreeMap::new(),
            recent_events: VecDeque::new(),
            params: profile.params.clone(),
            load: 0.0,
            relation_count: 0,
        }
    }

    pub fn features(&self, b: &BehaviorParams) -> Vec<f64> {
        initiate_features(
            &self.activity,
            self.relation_count,
            self.recent_events.len(),
            b,
        )
    }

    /// Outgoing relations above threshold at `now`.
    pub fn relation_view(&self, psi: &PsiConfig, now: Timestamp) -> Vec<RelationEdge> {
        self.relations
            .iter()
            .filter_map(|(partner, acc)| acc.to_edge(psi, now, &self.id, partner))
            .collect()
    }

    pub fn count_relations(&self, psi: &PsiConfig, now: Timestamp) -> usize {
        self.relations
            .values()
            .filter(|acc| psi.strength(acc.weight_at(psi, now)).is_some())
            .count()
    }

    /// Strength of this agent's relation to `other`, 0 when absent.
    pub fn relation_strength(&self, other: &EntityId, psi: &PsiConfig, now: Timestamp) -> f64 {
        self.relations
            .get(other)
            .and_then(|acc| psi.strength(acc.weight_at(psi, now)))
            .unwrap_or(0.0)
    }
}

/// CWI: per-action initiation probability `σ(w·x + b)`, scaled by the
/// step's seasonal multiplier.
pub fn cwi(a: &AgentState, step: usize, b: &BehaviorParams) -> WillingnessVector {
    let x = a.features(b);
    let season = b.season_multiplier(step);
    let initiate = a
        .params
        .initiate
        .iter()
        .map(|(action, model)| (*action, (model.prob(&x) * season).clamp(0.0, 1.0)))
        .collect();
    WillingnessVector {
        initiate,
        acceptance: a.params.accept.prob(&[0.0, a.load]),
    }
}

/// CWAI: probability that `receiver` accepts a proposal from `proposer`.
/// `relation` is the receiver's relation strength towards the proposer.
pub fn cwai(receiver: &AgentState, _proposer: &AgentState, _action: Action, relation: f64) -> f64 {
    receiver.params.accept.prob(&[relation, receiver.load])
}

/// CX: `activity <- rho · activity + this step's matching event strengths`.
pub fn cx_update(a: &mut AgentState, own_step_events: &[InteractionEvent], rho: f64) {
    a.activity = a.activity.scaled(rho);
    for e in own_step_events.iter().filter(|e| e.initiator == a.id) {
        a.activity.record(e);
    }
}

/// CR: fold the agent's own outgoing events into its relation accumulators
/// with the shared ψ rule.
pub fn cr_update(
    a: &mut AgentState,
    step_events: &[InteractionEvent],
    psi: &PsiConfig,
    capacity: usize,
) {
    for e in step_events.iter().filter(|e| e.initiator == a.id) {
        a.relations
            .entry(e.receiver.clone())
            .or_default()
            .add(psi, e);
        a.recent_events.push_back(e.clone());
    }
    while a.recent_events.len() > capacity {
        a.recent_events.pop_front();
    }
}

/// Passive aggregate over a group's members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAgentState {
    pub group: Group,
    /// Mean member activity per domain attribute.
    pub aggregate_attributes: BTreeMap<DomainRole, f64>,
    /// Summed symmetrized relation strength towards other groups.
    pub relations: BTreeMap<String, f64>,
}

impl GroupAgentState {
    pub fn new(group: Group) -> Self {
        GroupAgentState {
            group,
            aggregate_attributes: BTreeMap::new(),
            relations: BTreeMap::new(),
        }
    }
}
