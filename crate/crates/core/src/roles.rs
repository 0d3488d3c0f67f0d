//! Domain activity, role strengths and user categories.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::society::{EntityId, EventKind, InteractionEvent, InteractionLog, TimeWindow};

/// The five activity dimensions, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainRole {
    Friendsmaker,
    Talker,
    Surfer,
    Host,
    Traveller,
}

impl DomainRole {
    pub const ALL: [DomainRole; 5] = [
        DomainRole::Friendsmaker,
        DomainRole::Talker,
        DomainRole::Surfer,
        DomainRole::Host,
        DomainRole::Traveller,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DomainRole::Friendsmaker => "friendsmaker",
            DomainRole::Talker => "talker",
            DomainRole::Surfer => "surfer",
            DomainRole::Host => "host",
            DomainRole::Traveller => "traveller",
        }
    }

    /// Attribute credited to the initiator of an event of this kind.
    pub fn of_kind(kind: EventKind) -> DomainRole {
        match kind {
            EventKind::FriendRequest => DomainRole::Friendsmaker,
            EventKind::GroupPost => DomainRole::Talker,
            EventKind::SurfRequest | EventKind::StayGuest => DomainRole::Surfer,
            EventKind::HostOffer | EventKind::StayHosted => DomainRole::Host,
            EventKind::TravelSearch => DomainRole::Traveller,
        }
    }
}

impl fmt::Display for DomainRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Windowed activity scores, all non-negative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainActivity {
    pub friendsmaker: f64,
    pub talker: f64,
    pub surfer: f64,
    pub host: f64,
    pub traveller: f64,
}

impl DomainActivity {
    pub fn get(&self, role: DomainRole) -> f64 {
        match role {
            DomainRole::Friendsmaker => self.friendsmaker,
            DomainRole::Talker => self.talker,
            DomainRole::Surfer => self.surfer,
            DomainRole::Host => self.host,
            DomainRole::Traveller => self.traveller,
        }
    }

    pub fn get_mut(&mut self, role: DomainRole) -> &mut f64 {
        match role {
            DomainRole::Friendsmaker => &mut self.friendsmaker,
            DomainRole::Talker => &mut self.talker,
            DomainRole::Surfer => &mut self.surfer,
            DomainRole::Host => &mut self.host,
            DomainRole::Traveller => &mut self.traveller,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (DomainRole, f64)> + '_ {
        DomainRole::ALL.into_iter().map(|r| (r, self.get(r)))
    }

    pub fn total(&self) -> f64 {
        self.iter().map(|(_, v)| v).sum()
    }

    pub fn record(&mut self, e: &InteractionEvent) {
        *self.get_mut(DomainRole::of_kind(e.kind)) += e.strength;
    }

    /// Component-wise maximum.
    pub fn max(&self, other: &DomainActivity) -> DomainActivity {
        let mut out = *self;
        for r in DomainRole::ALL {
            *out.get_mut(r) = self.get(r).max(other.get(r));
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> DomainActivity {
        let mut out = *self;
        for r in DomainRole::ALL {
            *out.get_mut(r) *= factor;
        }
        out
    }
}

/// Activity of `j` inside `w`: strengths of the events it initiated, summed
/// per attribute.
pub fn domain_activity(log: &InteractionLog, j: &EntityId, w: TimeWindow) -> DomainActivity {
    let mut a = DomainActivity::default();
    for e in log.window_events(w).iter().filter(|e| &e.initiator == j) {
        a.record(e);
    }
    a
}

/// Activity of every member of `population` over `events`.
pub fn population_activity(
    population: &BTreeSet<EntityId>,
    events: &[InteractionEvent],
) -> BTreeMap<EntityId, DomainActivity> {
    let mut out: BTreeMap<EntityId, DomainActivity> = population
        .iter()
        .map(|id| (id.clone(), DomainActivity::default()))
        .collect();
    for e in events {
        if let Some(a) = out.get_mut(&e.initiator) {
            a.record(e);
        }
    }
    out
}

/// η per role, each in `[0, 1]`.
pub type RoleStrengths = BTreeMap<DomainRole, f64>;

/// η(role) = activity / population maximum of that attribute (0 when the
/// maximum is 0), clamped to `[0, 1]`.
pub fn role_strengths(a: &DomainActivity, population_max: &DomainActivity) -> RoleStrengths {
    DomainRole::ALL
        .into_iter()
        .map(|r| {
            let max = population_max.get(r);
            let eta = if max > 0.0 {
                (a.get(r) / max).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (r, eta)
        })
        .collect()
}

/// Argmax of the strengths with ties resolved by [`DomainRole::ALL`] order;
/// `None` if every strength is zero.
pub fn dominant_role(strengths: &RoleStrengths) -> Option<DomainRole> {
    let mut best: Option<(DomainRole, f64)> = None;
    for r in DomainRole::ALL {
        let v = strengths.get(&r).copied().unwrap_or(0.0);
        if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((r, v));
        }
    }
    best.map(|(r, _)| r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleProfile {
    pub strengths: RoleStrengths,
    pub dominant: Option<DomainRole>,
}

impl RoleProfile {
    pub fn from_strengths(strengths: RoleStrengths) -> Self {
        let dominant = dominant_role(&strengths);
        RoleProfile {
            strengths,
            dominant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UserCategory {
    Host,
    Traveller,
    Virtual,
    Homebody,
    Scrounger,
    Observer,
}

impl UserCategory {
    pub const ALL: [UserCategory; 6] = [
        UserCategory::Host,
        UserCategory::Traveller,
        UserCategory::Virtual,
        UserCategory::Homebody,
        UserCategory::Scrounger,
        UserCategory::Observer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UserCategory::Host => "Host",
            UserCategory::Traveller => "Traveller",
            UserCategory::Virtual => "Virtual",
            UserCategory::Homebody => "Homebody",
            UserCategory::Scrounger => "Scrounger",
            UserCategory::Observer => "Observer",
        }
    }
}

impl fmt::Display for UserCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UserCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        UserCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown category {s:?}")))
    }
}

/// Thresholds for [`classify_user`], in weighted events per window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleTable {
    /// Below this total activity a user is an Observer (ε_obs).
    pub observer_max_activity: f64,
    /// "Often" (τ_a).
    pub active: f64,
    /// "Rarely"/"very low" (τ_lo).
    pub low: f64,
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable {
            observer_max_activity: 1.0,
            active: 3.0,
            low: 1.0,
        }
    }
}

impl RuleTable {
    pub fn validate(&self) -> Result<()> {
        let all = [self.observer_max_activity, self.active, self.low];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::BadThresholds(format!(
                "thresholds must be finite and non-negative: {all:?}"
            )));
        }
        if self.active < self.low {
            return Err(Error::BadThresholds(format!(
                "active threshold {} is below low threshold {}",
                self.active, self.low
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SnaFeatures {
    pub closeness: f64,
    pub betweenness: f64,
}

/// First matching rule wins:
/// Observer, Scrounger, Homebody, Virtual, Traveller, then Host.
pub fn classify_user(
    a: &DomainActivity,
    sna: SnaFeatures,
    median_betweenness: f64,
    rules: &RuleTable,
) -> Result<UserCategory> {
    rules.validate()?;
    let moving = a.traveller + a.surfer;
    Ok(if a.total() < rules.observer_max_activity {
        UserCategory::Observer
    } else if a.surfer >= rules.active && a.host < rules.low {
        UserCategory::Scrounger
    } else if a.host >= rules.active && moving < rules.low {
        UserCategory::Homebody
    } else if a.friendsmaker >= rules.active && sna.betweenness >= median_betweenness {
        UserCategory::Virtual
    } else if moving > a.host && a.host >= rules.low {
        UserCategory::Traveller
    } else {
        UserCategory::Host
    })
}

/// Share of each category; always lists all six.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoleDistribution(pub BTreeMap<UserCategory, f64>);

impl RoleDistribution {
    pub fn get(&self, c: UserCategory) -> f64 {
        self.0.get(&c).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserCategory, f64)> + '_ {
        self.0.iter().map(|(c, v)| (*c, *v))
    }
}

pub fn role_distribution(
    categories: impl IntoIterator<Item = UserCategory>,
) -> Result<RoleDistribution> {
    let mut counts: BTreeMap<UserCategory, usize> =
        UserCategory::ALL.into_iter().map(|c| (c, 0)).collect();
    let mut n = 0usize;
    for c in categories {
        *counts.entry(c).or_insert(0) += 1;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyPopulation);
    }
    Ok(RoleDistribution(
        counts
            .into_iter()
            .map(|(c, k)| (c, k as f64 / n as f64))
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub activity: DomainActivity,
    pub profile: RoleProfile,
    pub category: UserCategory,
}

impl RoleAssignment {
    /// Placeholder for an entity not yet analysed.
    pub fn observer(activity: DomainActivity) -> Self {
        RoleAssignment {
            activity,
            profile: RoleProfile::from_strengths(
                DomainRole::ALL.into_iter().map(|r| (r, 0.0)).collect(),
            ),
            category: UserCategory::Observer,
        }
    }
}

pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

pub fn population_max(activity: &BTreeMap<EntityId, DomainActivity>) -> DomainActivity {
    activity
        .values()
        .fold(DomainActivity::default(), |acc, a| acc.max(a))
}

/// Profiles and categories for a whole population. Missing SNA values
/// count as 0.
pub fn assign_roles(
    activity: &BTreeMap<EntityId, DomainActivity>,
    closeness: &BTreeMap<EntityId, f64>,
    betweenness: &BTreeMap<EntityId, f64>,
    rules: &RuleTable,
) -> Result<BTreeMap<EntityId, RoleAssignment>> {
    rules.validate()?;
    let maxima = population_max(activity);
    let med = median(
        activity
            .keys()
            .map(|id| betweenness.get(id).copied().unwrap_or(0.0)),
    );
    activity
        .iter()
        .map(|(id, a)| {
            let sna = SnaFeatures {
                closeness: closeness.get(id).copied().unwrap_or(0.0),
                betweenness: betweenness.get(id).copied().unwrap_or(0.0),
            };
            let category = classify_user(a, sna, med, rules)?;
            Ok((
                id.clone(),
                RoleAssignment {
                    activity: *a,
                    profile: RoleProfile::from_strengths(role_strengths(a, &maxima)),
                    category,
                },
            ))
        })
        .collect()
}

/// CSV `entity,friendsmaker,talker,surfer,host,traveller,dominant,category`.
pub fn write_roles_csv<W: std::io::Write>(
    roles: &BTreeMap<EntityId, RoleAssignment>,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "entity",
        "friendsmaker",
        "talker",
        "surfer",
        "host",
        "traveller",
        "dominant",
        "category",
    ])?;
    for (id, r) in roles {
        let mut row = vec![id.to_string()];
        row.extend(r.activity.iter().map(|(_, v)| v.to_string()));
        row.push(
            r.profile
                .dominant
                .map(|d| d.to_string())
                .unwrap_or_default(),
        );
        row.push(r.category.to_string());
        wtr.write_record(row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(f: f64, t: f64, s: f64, h: f64, tr: f64) -> DomainActivity {
        DomainActivity {
            friendsmaker: f,
            talker: t,
            surfer: s,
            host: h,
            traveller: tr,
        }
    }

    fn rules() -> RuleTable {
        RuleTable {
            observer_max_activity: 1.0,
            active: 2.0,
            low: 1.0,
        }
    }

    #[test]
    fn activity_kind_mapping() {
        let w = TimeWindow::new(0, 100).unwrap();
        let j = EntityId::from("j");
        assert_eq!(
            domain_activity(&InteractionLog::new(), &j, w),
            DomainActivity::default()
        );

        let ev = |t, k| InteractionEvent::new(t, "j", "x", k, 1.0);
        let hosts =
            InteractionLog::from_events((1..=3).map(|t| ev(t, EventKind::HostOffer)).collect())
                .unwrap();
        assert_eq!(domain_activity(&hosts, &j, w), act(0.0, 0.0, 0.0, 3.0, 0.0));

        let surf = InteractionLog::from_events(vec![
            ev(1, EventKind::SurfRequest),
            ev(2, EventKind::StayGuest),
        ])
        .unwrap();
        assert_eq!(domain_activity(&surf, &j, w).surfer, 2.0);
    }

    #[test]
    fn strengths_examples() {
        let max = act(4.0, 4.0, 4.0, 4.0, 4.0);
        assert_eq!(
            role_strengths(&act(0.0, 0.0, 0.0, 4.0, 0.0), &max)[&DomainRole::Host],
            1.0
        );
        assert!(role_strengths(&DomainActivity::default(), &max)
            .values()
            .all(|&v| v == 0.0));
        assert_eq!(
            role_strengths(&act(0.0, 0.0, 0.0, 2.0, 0.0), &max)[&DomainRole::Host],
            0.5
        );
        let zero_max = role_strengths(&act(1.0, 0.0, 0.0, 0.0, 0.0), &DomainActivity::default());
        assert!(zero_max.values().all(|&v| v == 0.0));
    }

    #[test]
    fn dominant_examples() {
        let mut eta: RoleStrengths = DomainRole::ALL.into_iter().map(|r| (r, 0.3)).collect();
        eta.insert(DomainRole::Host, 0.9);
        assert_eq!(dominant_role(&eta), Some(DomainRole::Host));
        let equal: RoleStrengths = DomainRole::ALL.into_iter().map(|r| (r, 0.4)).collect();
        assert_eq!(dominant_role(&equal), Some(DomainRole::Friendsmaker));
        let zero: RoleStrengths = DomainRole::ALL.into_iter().map(|r| (r, 0.0)).collect();
        assert_eq!(dominant_role(&zero), None);
    }

    #[test]
    fn classification_examples() {
        let none = SnaFeatures::default();
        assert_eq!(
            classify_user(&act(0.2, 0.2, 0.2, 0.2, 0.1), none, 0.0, &rules()).unwrap(),
            UserCategory::Observer
        );
        assert_eq!(
            classify_user(&act(0.0, 0.0, 0.0, 5.0, 0.0), none, 0.0, &rules()).unwrap(),
            UserCategory::Homebody
        );
        assert_eq!(
            classify_user(&act(0.0, 0.0, 5.0, 0.0, 0.0), none, 0.0, &rules()).unwrap(),
            UserCategory::Scrounger
        );
        let bridge = SnaFeatures {
            closeness: 0.1,
            betweenness: 3.0,
        };
        assert_eq!(
            classify_user(&act(4.0, 0.0, 0.0, 0.0, 0.0), bridge, 1.0, &rules()).unwrap(),
            UserCategory::Virtual
        );
        assert_eq!(
            classify_user(&act(4.0, 0.0, 0.0, 0.0, 0.0), none, 1.0, &rules()).unwrap(),
            UserCategory::Host
        );
        assert_eq!(
            classify_user(&act(0.0, 0.0, 2.0, 1.0, 2.0), none, 0.0, &rules()).unwrap(),
            UserCategory::Traveller
        );
        assert_eq!(
            classify_user(&act(0.0, 0.0, 1.0, 3.0, 1.0), none, 0.0, &rules()).unwrap(),
            UserCategory::Host
        );
        let bad = RuleTable {
            observer_max_activity: 1.0,
            active: 0.5,
            low: 1.0,
        };
        assert!(matches!(
            classify_user(&act(1.0, 1.0, 1.0, 1.0, 1.0), none, 0.0, &bad),
            Err(Error::BadThresholds(_))
        ));
    }

    #[test]
    fn distribution_examples() {
        let d = role_distribution(vec![UserCategory::Observer; 3]).unwrap();
        assert_eq!(d.get(UserCategory::Observer), 1.0);
        assert_eq!(d.0.len(), 6);
        let d = role_distribution([
            UserCategory::Host,
            UserCategory::Traveller,
            UserCategory::Host,
            UserCategory::Traveller,
        ])
        .unwrap();
        assert_eq!(d.get(UserCategory::Host), 0.5);
        assert_eq!(d.get(UserCategory::Traveller), 0.5);
        assert!(matches!(role_distribution([]), Err(Error::EmptyPopulation)));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median([3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median([4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median([]), 0.0);
    }
}
