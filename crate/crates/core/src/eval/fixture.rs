//! Synthetic ground-truth society used as the bundled dataset.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::roles::{population_max, role_strengths, DomainActivity, RoleProfile};
use crate::simulator::{rng_from_seed, AgentProfile, AgentState, ArrivalModel, SimConfig, World};
use crate::society::{EntityId, InteractionLog};

/// A behavioural type: per-step activity rates and its share of the pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archetype {
    pub name: String,
    /// Relative frequency in tenths.
    pub weight: usize,
    pub rates: DomainActivity,
}

fn archetype(
    name: &str,
    weight: usize,
    fm: f64,
    surfer: f64,
    host: f64,
    traveller: f64,
) -> Archetype {
    Archetype {
        name: name.to_owned(),
        weight,
        rates: DomainActivity {
            friendsmaker: fm,
            talker: 0.0,
            surfer,
            host,
            traveller,
        },
    }
}

pub fn archetypes() -> Vec<Archetype> {
    vec![
        archetype("host", 2, 0.5, 1.0, 2.0, 0.5),
        archetype("traveller", 2, 0.3, 2.0, 1.0, 1.0),
        archetype("homebody", 1, 0.5, 0.0, 4.0, 0.0),
        archetype("scrounger", 1, 0.2, 4.0, 0.0, 0.2),
        archetype("virtual", 1, 4.0, 0.2, 0.0, 0.0),
        archetype("observer", 3, 0.2, 0.0, 0.0, 0.1),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureConfig {
    pub seed: u64,
    pub initial: usize,
    pub windows: usize,
    /// Expected newcomers per window.
    pub arrival_rate: f64,
    pub start: i64,
    pub step_seconds: i64,
    /// Individual rates are the archetype's times a factor drawn uniformly
    /// from `[1 - jitter, 1 + jitter]`.
    pub jitter: f64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            seed: 20_200_101,
            initial: 300,
            windows: 10,
            arrival_rate: 20.0,
            start: 1_577_836_800,
            step_seconds: 7 * 24 * 3600,
            jitter: 0.4,
        }
    }
}

impl FixtureConfig {
    pub fn sim_config(&self) -> SimConfig {
        let base = SimConfig::default();
        let profiles = archetypes()
            .iter()
            .flat_map(|a| {
                let p = AgentProfile::from_rates(&a.rates, &base.behavior);
                std::iter::repeat_n(p, a.weight)
            })
            .collect();
        SimConfig {
            steps: self.windows,
            seed: self.seed,
            step_seconds: self.step_seconds,
            arrival: ArrivalModel {
                rate: self.arrival_rate,
                profiles,
            },
            ..base
        }
    }
}

/// Initial world of `cfg.initial` agents drawn from the archetype mix.
pub fn fixture_world(cfg: &FixtureConfig) -> Result<World> {
    let sim = cfg.sim_config();
    sim.validate()?;
    let mut rng = rng_from_seed(cfg.seed ^ 0x5eed);
    let types = archetypes();
    let total: usize = types.iter().map(|a| a.weight).sum();

    let mut rates = BTreeMap::new();
    for i in 0..cfg.initial {
        let mut pick = rng.random_range(0..total);
        let kind = types
            .iter()
            .find(|a| {
                let hit = pick < a.weight;
                pick = pick.saturating_sub(a.weight);
                hit
            })
            .expect("pick is below the total weight");
        let factor = 1.0 + cfg.jitter * (2.0 * rng.random::<f64>() - 1.0);
        rates.insert(EntityId::new(format!("u{i:04}")), kind.rates.scaled(factor));
    }
    let maxima = population_max(&rates);
    let agents = rates
        .iter()
        .map(|(id, r)| {
            let profile = AgentProfile::from_rates(r, &sim.behavior);
            let role = RoleProfile::from_strengths(role_strengths(r, &maxima));
            (id.clone(), AgentState::new(id.clone(), &profile, role))
        })
        .collect();
    Ok(World::from_agents(cfg.start, agents))
}

/// The fixture interaction log: `cfg.windows` simulated steps.
pub fn fixture_log(cfg: &FixtureConfig) -> Result<InteractionLog> {
    let sim = cfg.sim_config();
    let mut world = fixture_world(cfg)?;
    let mut rng = rng_from_seed(cfg.seed);
    for _ in 0..cfg.windows {
        world.step(&sim, &mut rng)?;
    }
    Ok(world.log)
}
