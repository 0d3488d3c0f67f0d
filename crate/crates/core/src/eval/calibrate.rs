use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    cohort, cohort_distribution, compare_distributions, ComparisonReport, PopulationScope,
};
use crate::error::{Error, Result};
use crate::simulator::{observed_rates, run, AgentProfile, ArrivalModel, SimConfig};
use crate::society::{snapshot, InteractionLog, SnapshotConfig, SocietySnapshot, Timestamp};

/// Calibrated knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Rho,
    ObserverMaxActivity,
    ActionScale,
}

impl Parameter {
    pub const ALL: [Parameter; 3] = [
        Parameter::Rho,
        Parameter::ObserverMaxActivity,
        Parameter::ActionScale,
    ];

    pub fn get(self, c: &SimConfig) -> f64 {
        match self {
            Parameter::Rho => c.behavior.rho,
            Parameter::ObserverMaxActivity => c.rules.observer_max_activity,
            Parameter::ActionScale => c.behavior.action_scale,
        }
    }

    pub fn set(self, c: &mut SimConfig, v: f64) {
        match self {
            Parameter::Rho => c.behavior.rho = v,
            Parameter::ObserverMaxActivity => c.rules.observer_max_activity = v,
            Parameter::ActionScale => c.behavior.action_scale = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationGrid {
    pub rho: Vec<f64>,
    pub observer_max_activity: Vec<f64>,
    pub action_scale: Vec<f64>,
    /// Seeds averaged per candidate; empty means the config's own seed.
    pub seeds: Vec<u64>,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        CalibrationGrid {
            rho: vec![0.7, 0.8, 0.9, 0.95],
            observer_max_activity: vec![0.5, 1.0, 1.5, 2.0],
            action_scale: vec![0.6, 0.8, 1.0, 1.2, 1.4],
            seeds: Vec::new(),
        }
    }
}

impl CalibrationGrid {
    pub fn values(&self, p: Parameter) -> &[f64] {
        match p {
            Parameter::Rho => &self.rho,
            Parameter::ObserverMaxActivity => &self.observer_max_activity,
            Parameter::ActionScale => &self.action_scale,
        }
    }
}

/// One evaluated candidate. Round 0 is the starting config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStep {
    pub round: usize,
    pub parameter: Option<Parameter>,
    pub value: Option<f64>,
    pub l1: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub best: SimConfig,
    pub best_l1: f64,
    pub history: Vec<CalibrationStep>,
}

/// Newcomer arrivals seen in `s0`: entities first seen after the first
/// window, per later window, with profiles fitted to their observed rates.
pub fn fit_arrivals(s0: &SocietySnapshot, log_start: Timestamp, cfg: &SimConfig) -> ArrivalModel {
    let step = cfg.step_seconds;
    let windows = ((s0.time - log_start) as f64 / step as f64).ceil() as i64 - 1;
    let newcomers = cohort(&s0.first_seen, log_start + step);
    if windows < 1 || newcomers.is_empty() {
        return ArrivalModel::default();
    }
    let rates = observed_rates(s0, step);
    ArrivalModel {
        rate: newcomers.len() as f64 / windows as f64,
        profiles: newcomers
            .iter()
            .map(|id| AgentProfile::from_rates(&rates[id], &cfg.behavior))
            .collect(),
    }
}

/// Snapshot of the configuration period `[log start, split)` and the
/// simulator config that runs it up to the end of the log.
pub fn configure(
    log: &InteractionLog,
    split: Timestamp,
    base: &SimConfig,
) -> Result<(SocietySnapshot, SimConfig)> {
    base.validate()?;
    let (start, end) = log.span().ok_or(Error::DegenerateSplit(split))?;
    if split <= start || split > end {
        return Err(Error::DegenerateSplit(split));
    }
    let analysis = SnapshotConfig {
        lookback: split - start,
        ..base.analysis()
    };
    let s0 = snapshot(log, split, &analysis)?;
    let step = base.step_seconds;
    let steps = ((end + 1 - split) + step - 1) / step;
    let cfg = SimConfig {
        steps: steps as usize,
        arrival: fit_arrivals(&s0, start, base),
        ..base.clone()
    };
    Ok((s0, cfg))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutEvaluation {
    /// End of the simulated period.
    pub at: Timestamp,
    pub config: SimConfig,
    pub whole: ComparisonReport,
    /// `None` when either side has no newcomers.
    pub newcomers: Option<ComparisonReport>,
    /// Configuration-period events followed by the synthetic ones.
    pub predicted_log: InteractionLog,
}

/// Configure from `[start, split)`, simulate to the end of the log and
/// compare with the observed final window analysed under `reference`.
pub fn holdout_evaluation(
    log: &InteractionLog,
    split: Timestamp,
    base: &SimConfig,
    reference: &SnapshotConfig,
) -> Result<HoldoutEvaluation> {
    let (s0, cfg) = configure(log, split, base)?;
    let out = run(&s0, &cfg)?;
    let at = out.world.time;
    let observed = snapshot(log, at, reference)?;
    let predicted = &out.final_snapshot;
    let whole = compare_distributions(
        &observed.role_distribution()?,
        &predicted.role_distribution()?,
    )?
    .with_config(&cfg)?;

    let obs_new = cohort(&observed.first_seen, split);
    let pred_new = cohort(&predicted.first_seen, split);
    let newcomers = if obs_new.is_empty() || pred_new.is_empty() {
        None
    } else {
        Some(
            compare_distributions(
                &cohort_distribution(&observed, &obs_new)?,
                &cohort_distribution(predicted, &pred_new)?,
            )?
            .with_scope(PopulationScope::NewEntitiesOnly)
            .with_config(&cfg)?,
        )
    };
    let mut events = log.before(split).to_vec();
    events.extend_from_slice(out.synthetic.events());
    Ok(HoldoutEvaluation {
        at,
        config: cfg,
        whole,
        newcomers,
        predicted_log: InteractionLog::from_events(events)?,
    })
}

fn mean_holdout_l1(
    log: &InteractionLog,
    split: Timestamp,
    cfg: &SimConfig,
    seeds: &[u64],
    reference: &SnapshotConfig,
) -> Result<f64> {
    let scores = seeds
        .par_iter()
        .map(|&seed| {
            let c = SimConfig {
                seed,
                ..cfg.clone()
            };
            holdout_evaluation(log, split, &c, reference).map(|h| h.whole.l1_distance)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Coordinate descent over the grid, one parameter at a time, accepting
/// only strict improvements of the mean holdout L1. The observed side is
/// always analysed with the starting config's rules.
pub fn calibration_loop(
    log: &InteractionLog,
    split: Timestamp,
    cfg: &SimConfig,
    grid: &CalibrationGrid,
    max_rounds: usize,
) -> Result<CalibrationResult> {
    let reference = cfg.analysis();
    let seeds = if grid.seeds.is_empty() {
        vec![cfg.seed]
    } else {
        grid.seeds.clone()
    };
    let mut best = cfg.clone();
    let mut best_l1 = mean_holdout_l1(log, split, &best, &seeds, &reference)?;
    let mut history = vec![CalibrationStep {
        round: 0,
        parameter: None,
        value: None,
        l1: best_l1,
        accepted: true,
    }];

    for round in 1..=max_rounds {
        let mut improved = false;
        for p in Parameter::ALL {
            let current = p.get(&best);
            let candidates: Vec<f64> = grid
                .values(p)
                .iter()
                .copied()
                .filter(|v| *v != current)
                .collect();
            let scored = candidates
                .par_iter()
                .map(|&v| {
                    let mut c = best.clone();
                    p.set(&mut c, v);
                    c.validate()?;
                    Ok((mean_holdout_l1(log, split, &c, &seeds, &reference)?, v))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let winner = scored
                .iter()
                .copied()
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
                .filter(|(l1, _)| l1.partial_cmp(&best_l1) == Some(Ordering::Less));
            for &(l1, v) in &scored {
                history.push(CalibrationStep {
                    round,
                    parameter: Some(p),
                    value: Some(v),
                    l1,
                    accepted: winner == Some((l1, v)),
                });
            }
            if let Some((l1, v)) = winner {
                p.set(&mut best, v);
                best_l1 = l1;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(CalibrationResult {
        best,
        best_l1,
        history,
    })
}
