//! Overlapping groups by clique percolation, plus group quality and
//! evolution tracking.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::society::{
    EntityId, IndexedGraph, InteractionEvent, InteractionLog, RelationGraph, TimeWindow, Timestamp,
    TokenCounts,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub id: String,
    pub members: BTreeSet<EntityId>,
    /// Membership strength φ of each member, in `[0, 1]`.
    #[serde(rename = "phi")]
    pub membership_strength: BTreeMap<EntityId, f64>,
    pub subject_matter: TokenCounts,
    pub born_at: Timestamp,
}

impl Group {
    pub fn new(members: BTreeSet<EntityId>, born_at: Timestamp) -> Self {
        Group {
            id: group_id(&members),
            members,
            membership_strength: BTreeMap::new(),
            subject_matter: TokenCounts::new(),
            born_at,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Deterministic id derived from the sorted member list.
pub fn group_id(members: &BTreeSet<EntityId>) -> String {
    let mut hasher = Sha256::new();
    for m in members {
        hasher.update(m.as_str().as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
    format!("g{}-{hex}", members.len())
}

fn check_k(k: usize) -> Result<()> {
    if k < 3 {
        Err(Error::BadK(k))
    } else {
        Ok(())
    }
}

fn extend_cliques(
    ix: &IndexedGraph,
    k: usize,
    current: &mut Vec<usize>,
    candidates: &[usize],
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for (pos, &v) in candidates.iter().enumerate() {
        if candidates.len() - pos < k - current.len() {
            break;
        }
        let next: Vec<usize> = candidates[pos + 1..]
            .iter()
            .copied()
            .filter(|&w| ix.adjacent(v, w))
            .collect();
        current.push(v);
        extend_cliques(ix, k, current, &next, out);
        current.pop();
    }
}

fn k_cliques_indexed(ix: &IndexedGraph, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    for v in 0..ix.len() {
        let higher: Vec<usize> = ix.neighbors(v).filter(|&w| w > v).collect();
        current.push(v);
        extend_cliques(ix, k, &mut current, &higher, &mut out);
        current.pop();
    }
    out
}

/// Every complete subgraph on exactly `k` nodes of the symmetrized graph.
pub fn enumerate_k_cliques(g: &RelationGraph, k: usize) -> Result<BTreeSet<BTreeSet<EntityId>>> {
    check_k(k)?;
    let ix = g.indexed();
    Ok(k_cliques_indexed(&ix, k)
        .into_iter()
        .map(|c| c.into_iter().map(|i| ix.ids[i].clone()).collect())
        .collect())
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Clique percolation: unions of k-cliques chained through (k-1)-node
/// overlaps. Groups come back sorted by member list with empty φ and
/// subject matter; see [`detect_groups`] for the filled version.
pub fn cpm_communities(g: &RelationGraph, k: usize) -> Result<Vec<Group>> {
    check_k(k)?;
    let ix = g.indexed();
    let cliques = k_cliques_indexed(&ix, k);
    let mut sets = DisjointSets::new(cliques.len());
    // Two k-cliques percolate iff they share a (k-1)-subset.
    let mut by_face: HashMap<Vec<usize>, usize> = HashMap::new();
    for (ci, clique) in cliques.iter().enumerate() {
        for skip in 0..k {
            let face: Vec<usize> = clique
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect();
            match by_face.get(&face) {
                Some(&other) => sets.union(ci, other),
                None => {
                    by_face.insert(face, ci);
                }
            }
        }
    }
    let mut members: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (ci, clique) in cliques.iter().enumerate() {
        let root = sets.find(ci);
        members
            .entry(root)
            .or_default()
            .extend(clique.iter().copied());
    }
    let mut groups: Vec<Group> = members
        .into_values()
        .map(|m| {
            let ids = m.into_iter().map(|i| ix.ids[i].clone()).collect();
            Group::new(ids, g.as_of)
        })
        .collect();
    groups.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(groups)
}

fn incident_weights(ix: &IndexedGraph, j: usize, members: &BTreeSet<usize>) -> (f64, f64) {
    ix.und[j]
        .iter()
        .fold((0.0, 0.0), |(inside, total), (&other, &w)| {
            if members.contains(&other) {
                (inside + w, total + w)
            } else {
                (inside, total + w)
            }
        })
}

fn member_indices(ix: &IndexedGraph, grp: &Group) -> BTreeSet<usize> {
    grp.members.iter().filter_map(|m| ix.index_of(m)).collect()
}

/// φ(j, grp): share of j's symmetrized incident weight that stays inside
/// the group; 0 when j has no edges.
pub fn membership_strength(g: &RelationGraph, grp: &Group, j: &EntityId) -> Result<f64> {
    if !grp.members.contains(j) {
        return Err(Error::NotMember {
            entity: j.clone(),
            group: grp.id.clone(),
        });
    }
    let ix = g.indexed();
    let Some(ji) = ix.index_of(j) else {
        return Ok(0.0);
    };
    let (inside, total) = incident_weights(&ix, ji, &member_indices(&ix, grp));
    Ok(if total > 0.0 { inside / total } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub density: f64,
    pub internal_weight: f64,
    pub external_weight: f64,
    /// `internal / external`; `None` when there is no external weight.
    pub internal_external_ratio: Option<f64>,
}

impl GroupMetrics {
    /// Ratio with `+inf` standing in for the flagged no-external case.
    pub fn ratio_or_inf(&self) -> f64 {
        self.internal_external_ratio.unwrap_or(f64::INFINITY)
    }
}

/// Density of internal undirected edges and internal/external weight ratio.
pub fn group_metrics(g: &RelationGraph, grp: &Group) -> Result<GroupMetrics> {
    let m = grp.members.len();
    if m < 2 {
        return Err(Error::TooSmall(grp.id.clone()));
    }
    let ix = g.indexed();
    let members = member_indices(&ix, grp);
    let mut internal_edges = 0usize;
    let mut internal = 0.0;
    let mut external = 0.0;
    for &u in &members {
        for (&v, &w) in &ix.und[u] {
            if members.contains(&v) {
                if u < v {
                    internal_edges += 1;
                    internal += w;
                }
            } else {
                external += w;
            }
        }
    }
    let pairs = (m * (m - 1) / 2) as f64;
    Ok(GroupMetrics {
        density: internal_edges as f64 / pairs,
        internal_weight: internal,
        external_weight: external,
        internal_external_ratio: (external > 0.0).then(|| internal / external),
    })
}

fn subject_matter_of(events: &[InteractionEvent], members: &BTreeSet<EntityId>) -> TokenCounts {
    let mut counts = TokenCounts::new();
    for e in events {
        if members.contains(&e.initiator) && members.contains(&e.receiver) {
            for tag in &e.tags {
                *counts.entry(tag.clone()).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Bag of tags over events inside `w` whose endpoints are both members.
pub fn group_subject_matter(log: &InteractionLog, grp: &Group, w: TimeWindow) -> TokenCounts {
    subject_matter_of(log.window_events(w), &grp.members)
}

/// CPM groups with φ and subject matter filled from the window's events.
pub fn detect_groups(
    g: &RelationGraph,
    k: usize,
    window_events: &[InteractionEvent],
    window: TimeWindow,
) -> Result<Vec<Group>> {
    let ix = g.indexed();
    let mut groups = cpm_communities(g, k)?;
    for grp in &mut groups {
        grp.born_at = window.end;
        let members = member_indices(&ix, grp);
        grp.membership_strength = grp
            .members
            .iter()
            .map(|m| {
                let phi = ix
                    .index_of(m)
                    .map(|i| {
                        let (inside, total) = incident_weights(&ix, i, &members);
                        if total > 0.0 {
                            inside / total
                        } else {
                            0.0
                        }
                    })
                    .unwrap_or(0.0);
                (m.clone(), phi)
            })
            .collect();
        grp.subject_matter = subject_matter_of(window_events, &grp.members);
    }
    Ok(groups)
}

pub fn jaccard(a: &BTreeSet<EntityId>, b: &BTreeSet<EntityId>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionKind {
    Birth,
    Death,
    Grow,
    Shrink,
    Merge,
    Split,
    Continue,
}

impl EvolutionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EvolutionKind::Birth => "birth",
            EvolutionKind::Death => "death",
            EvolutionKind::Grow => "grow",
            EvolutionKind::Shrink => "shrink",
            EvolutionKind::Merge => "merge",
            EvolutionKind::Split => "split",
            EvolutionKind::Continue => "continue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEvolutionEvent {
    pub kind: EvolutionKind,
    pub from: Vec<String>,
    pub to: Vec<String>,
    pub jaccard: f64,
}

/// Match groups of consecutive windows and classify what happened.
///
/// Pairs with member-set Jaccard ≥ `match_threshold` are matched one to one,
/// greedily by Jaccard, then intersection size, then ids. Leftover groups
/// that still clear the threshold against a matched group attach to their
/// best partner and turn the match into a merge (extra sources) or a split
/// (extra targets). Anything else is a birth or a death.
pub fn track_evolution(
    prev: &[Group],
    next: &[Group],
    match_threshold: f64,
) -> Result<Vec<GroupEvolutionEvent>> {
    if !(match_threshold > 0.0 && match_threshold <= 1.0) {
        return Err(Error::BadConfig(format!(
            "match threshold must be in (0, 1], got {match_threshold}"
        )));
    }
    struct Cand {
        i: usize,
        j: usize,
        jac: f64,
        inter: usize,
    }
    let mut cands = Vec::new();
    for (i, p) in prev.iter().enumerate() {
        for (j, n) in next.iter().enumerate() {
            let jac = jaccard(&p.members, &n.members);
            if jac >= match_threshold {
                let inter = p.members.intersection(&n.members).count();
                cands.push(Cand { i, j, jac, inter });
            }
        }
    }
    let better = |a: &Cand, b: &Cand| {
        b.jac
            .total_cmp(&a.jac)
            .then(b.inter.cmp(&a.inter))
            .then_with(|| prev[a.i].id.cmp(&prev[b.i].id))
            .then_with(|| next[a.j].id.cmp(&next[b.j].id))
    };
    cands.sort_by(better);

    let mut prev_match: Vec<Option<usize>> = vec![None; prev.len()];
    let mut next_match: Vec<Option<usize>> = vec![None; next.len()];
    let mut matches = Vec::new();
    for c in &cands {
        if prev_match[c.i].is_none() && next_match[c.j].is_none() {
            prev_match[c.i] = Some(c.j);
            next_match[c.j] = Some(c.i);
            matches.push((c.i, c.j, c.jac));
        }
    }

    // Leftovers attach to the best matched partner on the other side.
    let mut extra_sources: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut extra_targets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut absorbed_prev = vec![false; prev.len()];
    let mut absorbed_next = vec![false; next.len()];
    for c in &cands {
        if prev_match[c.i].is_none() && !absorbed_prev[c.i] && next_match[c.j].is_some() {
            absorbed_prev[c.i] = true;
            extra_sources.entry(c.j).or_default().push(c.i);
        }
        if next_match[c.j].is_none() && !absorbed_next[c.j] && prev_match[c.i].is_some() {
            absorbed_next[c.j] = true;
            extra_targets.entry(c.i).or_default().push(c.j);
        }
    }

    let ids = |gs: &[Group], idx: &[usize]| {
        let mut v: Vec<String> = idx.iter().map(|&x| gs[x].id.clone()).collect();
        v.sort();
        v
    };
    let mut events = Vec::new();
    for (i, j, jac) in matches {
        let sources = extra_sources.get(&j);
        let targets = extra_targets.get(&i);
        if let Some(extra) = sources {
            let mut from = extra.clone();
            from.push(i);
            events.push(GroupEvolutionEvent {
                kind: EvolutionKind::Merge,
                from: ids(prev, &from),
                to: vec![next[j].id.clone()],
                jaccard: jac,
            });
        }
        if let Some(extra) = targets {
            let mut to = extra.clone();
            to.push(j);
            events.push(GroupEvolutionEvent {
                kind: EvolutionKind::Split,
                from: vec![prev[i].id.clone()],
                to: ids(next, &to),
                jaccard: jac,
            });
        }
        if sources.is_none() && targets.is_none() {
            let kind = match next[j].len().cmp(&prev[i].len()) {
                std::cmp::Ordering::Greater => EvolutionKind::Grow,
                std::cmp::Ordering::Less => EvolutionKind::Shrink,
                std::cmp::Ordering::Equal => EvolutionKind::Continue,
            };
            events.push(GroupEvolutionEvent {
                kind,
                from: vec![prev[i].id.clone()],
                to: vec![next[j].id.clone()],
                jaccard: jac,
            });
        }
    }
    for (i, p) in prev.iter().enumerate() {
        if prev_match[i].is_none() && !absorbed_prev[i] {
            events.push(GroupEvolutionEvent {
                kind: EvolutionKind::Death,
                from: vec![p.id.clone()],
                to: Vec::new(),
                jaccard: 0.0,
            });
        }
    }
    for (j, n) in next.iter().enumerate() {
        if next_match[j].is_none() && !absorbed_next[j] {
            events.push(GroupEvolutionEvent {
                kind: EvolutionKind::Birth,
                from: Vec::new(),
                to: vec![n.id.clone()],
                jaccard: 0.0,
            });
        }
    }
    Ok(events)
}

/// Mean Jaccard of consecutive member sets along a matched chain.
pub fn membership_stability(history: &[BTreeSet<EntityId>]) -> Result<f64> {
    if history.len() < 2 {
        return Err(Error::TooShort);
    }
    let total: f64 = history.windows(2).map(|w| jaccard(&w[0], &w[1])).sum();
    Ok(total / (history.len() - 1) as f64)
}

pub fn write_groups_json<W: std::io::Write>(groups: &[Group], writer: W) -> Result<()> {
    let value = serde_json::to_value(groups)?;
    serde_json::to_writer_pretty(writer, &value)?;
    Ok(())
}

/// CSV `window,kind,from,to,jaccard`; multiple ids are `;`-joined.
pub fn write_evolution_csv<W: std::io::Write>(
    rows: &[(Timestamp, GroupEvolutionEvent)],
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["window", "kind", "from", "to", "jaccard"])?;
    for (window, ev) in rows {
        wtr.write_record([
            window.to_string(),
            ev.kind.as_str().to_owned(),
            ev.from.join(";"),
            ev.to.join(";"),
            ev.jaccard.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
