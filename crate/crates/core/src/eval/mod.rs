//! Comparing observed and simulated role distributions, calibration, and
//! report rendering.

mod calibrate;
mod fixture;
mod report;

pub use calibrate::{
    calibration_loop, configure, fit_arrivals, holdout_evaluation, CalibrationGrid,
    CalibrationResult, CalibrationStep, HoldoutEvaluation, Parameter,
};
pub use fixture::{archetypes, fixture_log, fixture_world, Archetype, FixtureConfig};
pub use report::{emit_report, ReportFormat};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roles::{role_distribution, RoleDistribution, UserCategory};
use crate::society::{
    snapshot, EntityId, InteractionLog, SnapshotConfig, SocietySnapshot, Timestamp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationScope {
    #[default]
    All,
    NewEntitiesOnly,
}

impl PopulationScope {
    pub fn as_str(self) -> &'static str {
        match self {
            PopulationScope::All => "all",
            PopulationScope::NewEntitiesOnly => "new_entities_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub observed: RoleDistribution,
    pub predicted: RoleDistribution,
    pub l1_distance: f64,
    /// `predicted - observed` per category.
    pub per_category_delta: BTreeMap<UserCategory, f64>,
    pub population_scope: PopulationScope,
    /// Parameters that produced the prediction.
    pub config_echo: serde_json::Value,
}

impl ComparisonReport {
    pub fn with_scope(mut self, scope: PopulationScope) -> Self {
        self.population_scope = scope;
        self
    }

    pub fn with_config<T: Serialize>(mut self, config: &T) -> Result<Self> {
        self.config_echo = serde_json::to_value(config)?;
        Ok(self)
    }
}

fn same_categories(d: &RoleDistribution) -> bool {
    d.0.len() == UserCategory::ALL.len() && UserCategory::ALL.iter().all(|c| d.0.contains_key(c))
}

pub fn l1_distance(a: &RoleDistribution, b: &RoleDistribution) -> Result<f64> {
    if !same_categories(a) || !same_categories(b) {
        return Err(Error::CategoryMismatch);
    }
    Ok(UserCategory::ALL
        .iter()
        .map(|c| (a.get(*c) - b.get(*c)).abs())
        .sum())
}

pub fn compare_distributions(
    observed: &RoleDistribution,
    predicted: &RoleDistribution,
) -> Result<ComparisonReport> {
    let l1 = l1_distance(observed, predicted)?;
    Ok(ComparisonReport {
        observed: observed.clone(),
        predicted: predicted.clone(),
        l1_distance: l1,
        per_category_delta: UserCategory::ALL
            .iter()
            .map(|c| (*c, predicted.get(*c) - observed.get(*c)))
            .collect(),
        population_scope: PopulationScope::All,
        config_echo: serde_json::Value::Null,
    })
}

/// Entities first seen at or after `t_init`.
pub fn cohort(first_seen: &BTreeMap<EntityId, Timestamp>, t_init: Timestamp) -> BTreeSet<EntityId> {
    first_seen
        .iter()
        .filter(|(_, t)| **t >= t_init)
        .map(|(id, _)| id.clone())
        .collect()
}

/// Role distribution of the snapshot restricted to `members`.
pub fn cohort_distribution(
    s: &SocietySnapshot,
    members: &BTreeSet<EntityId>,
) -> Result<RoleDistribution> {
    role_distribution(
        s.roles
            .iter()
            .filter(|(id, _)| members.contains(*id))
            .map(|(_, r)| r.category),
    )
}

/// Compare the role distributions of entities first seen at or after
/// `t_init`, both logs analysed at `at` with `cfg`.
pub fn compare_new_entities(
    observed_log: &InteractionLog,
    predicted_log: &InteractionLog,
    t_init: Timestamp,
    at: Timestamp,
    cfg: &SnapshotConfig,
) -> Result<ComparisonReport> {
    let side = |log: &InteractionLog| -> Result<RoleDistribution> {
        let s = snapshot(log, at, cfg)?;
        let members = cohort(&s.first_seen, t_init);
        if members.is_empty() {
            return Err(Error::EmptyCohort(t_init));
        }
        cohort_distribution(&s, &members)
    };
    let observed = side(observed_log)?;
    let predicted = side(predicted_log)?;
    Ok(compare_distributions(&observed, &predicted)?.with_scope(PopulationScope::NewEntitiesOnly))
}
