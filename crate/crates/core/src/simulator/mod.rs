//! Agent-based simulation of a society forward from an observed snapshot.
//!
//! Agents initiate actions with logistic willingness (CWI), partners accept
//! with logistic acceptance (CWAI), accepted actions become synthetic
//! events, and every agent then updates its activity (CX) and relations
//! (CR). Runs are deterministic for a given seed.

mod agent;
mod config;
mod world;

pub use agent::{
    cr_update, cwai, cwi, cx_update, initiate_features, logistic, logit, steady_state, Action,
    AgentProfile, AgentState, DecisionParams, GroupAgentState, Logistic, WillingnessVector,
    ACCEPT_FEATURES, INITIATE_FEATURES,
};
pub use config::{ArrivalModel, BehaviorParams, SimConfig};
pub use world::{init_population, observed_rates, select_partner, World};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::roles::RoleDistribution;
use crate::society::{snapshot_with_population, InteractionLog, SocietySnapshot};

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    /// Analysis of the last simulated window.
    pub final_snapshot: SocietySnapshot,
    pub synthetic: InteractionLog,
    /// Role distribution after each step.
    pub trajectory: Vec<RoleDistribution>,
    pub world: World,
}

/// Simulate `cfg.steps` steps from `s0` and analyse each resulting window.
pub fn run(s0: &SocietySnapshot, cfg: &SimConfig) -> Result<SimOutcome> {
    let mut world = init_population(s0, cfg)?;
    let mut rng = rng_from_seed(cfg.seed);
    let analysis = cfg.analysis();
    let mut trajectory = Vec::with_capacity(cfg.steps);
    let mut last = None;
    for _ in 0..cfg.steps {
        world.step(cfg, &mut rng)?;
        let snap = snapshot_with_population(&world.log, world.time, &analysis, &world.known)?;
        trajectory.push(snap.role_distribution()?);
        last = Some(snap);
    }
    Ok(SimOutcome {
        final_snapshot: last.expect("steps >= 1 is validated"),
        synthetic: world.log.clone(),
        trajectory,
        world,
    })
}
