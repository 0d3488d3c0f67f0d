use serde::{Deserialize, Serialize};

use super::agent::AgentProfile;
use crate::error::{Error, Result};
use crate::roles::RuleTable;
use crate::sna::SnaParams;
use crate::society::{PsiConfig, SnapshotConfig};

/// Knobs of the agent decision functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorParams {
    /// CX retention per step, in `[0, 1)`.
    pub rho: f64,
    /// Bernoulli draws per action kind per step.
    pub attempts: usize,
    /// Probability of exploring a random non-neighbour instead of a FOAF.
    pub epsilon_explore: f64,
    /// Strength of every synthetic event.
    pub event_strength: f64,
    /// Multiplier applied to fitted initiation rates.
    pub action_scale: f64,
    pub buffer_capacity: usize,
    /// Activity scale of the initiation features.
    pub feature_scale: f64,
    pub self_weight: f64,
    pub relation_weight: f64,
    pub recency_weight: f64,
    pub accept_bias: f64,
    pub accept_relation_weight: f64,
    pub accept_load_weight: f64,
    pub min_prob: f64,
    pub max_prob: f64,
    /// Optional per-step multiplier on initiation probabilities; the last
    /// entry repeats. Empty means 1.
    pub season: Vec<f64>,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        BehaviorParams {
            rho: 0.9,
            attempts: 4,
            epsilon_explore: 0.2,
            event_strength: 1.0,
            action_scale: 1.0,
            buffer_capacity: 32,
            feature_scale: 4.0,
            self_weight: 0.3,
            relation_weight: 0.1,
            recency_weight: 0.0,
            accept_bias: 2.5,
            accept_relation_weight: 1.0,
            accept_load_weight: -0.1,
            min_prob: 1e-4,
            max_prob: 0.999,
            season: Vec::new(),
        }
    }
}

impl BehaviorParams {
    pub fn season_multiplier(&self, step: usize) -> f64 {
        match self.season.len() {
            0 => 1.0,
            n => self.season[step.min(n - 1)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::BadConfig(msg.to_owned()));
        if !(0.0..1.0).contains(&self.rho) {
            return bad("rho must be in [0, 1)");
        }
        if self.attempts == 0 {
            return bad("attempts must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.epsilon_explore) {
            return bad("epsilon_explore must be in [0, 1]");
        }
        if !(self.event_strength > 0.0) || !(self.action_scale >= 0.0) {
            return bad("event_strength must be > 0 and action_scale >= 0");
        }
        if !(self.feature_scale > 0.0) {
            return bad("feature_scale must be > 0");
        }
        if !(0.0 < self.min_prob && self.min_prob < self.max_prob && self.max_prob < 1.0) {
            return bad("need 0 < min_prob < max_prob < 1");
        }
        if self.season.iter().any(|s| !(*s >= 0.0)) {
            return bad("season multipliers must be >= 0");
        }
        Ok(())
    }
}

/// Newcomer process: Poisson counts, profiles drawn uniformly from an
/// empirical pool.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrivalModel {
    pub rate: f64,
    pub profiles: Vec<AgentProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub steps: usize,
    pub seed: u64,
    /// Simulated seconds per step; one step is one analysis window.
    pub step_seconds: i64,
    pub arrival: ArrivalModel,
    pub psi: PsiConfig,
    pub behavior: BehaviorParams,
    pub rules: RuleTable,
    pub cpm_k: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps: 10,
            seed: 0,
            step_seconds: 7 * 24 * 3600,
            arrival: ArrivalModel::default(),
            psi: PsiConfig::default(),
            behavior: BehaviorParams::default(),
            rules: RuleTable::default(),
            cpm_k: 3,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::BadConfig("steps must be at least 1".into()));
        }
        if self.step_seconds <= 0 {
            return Err(Error::BadConfig("step_seconds must be positive".into()));
        }
        if !(self.arrival.rate >= 0.0) || !self.arrival.rate.is_finite() {
            return Err(Error::BadConfig(
                "arrival rate must be finite and >= 0".into(),
            ));
        }
        if self.arrival.rate > 0.0 && self.arrival.profiles.is_empty() {
            return Err(Error::BadConfig(
                "arrival rate is positive but no newcomer profiles are given".into(),
            ));
        }
        self.psi.validate()?;
        self.behavior.validate()?;
        self.analysis().validate()
    }

    /// Analysis settings for one-step windows.
    pub fn analysis(&self) -> SnapshotConfig {
        SnapshotConfig {
            lookback: self.step_seconds,
            psi: self.psi,
            cpm_k: self.cpm_k,
            rules: self.rules,
            sna: SnaParams::default(),
        }
    }
}
