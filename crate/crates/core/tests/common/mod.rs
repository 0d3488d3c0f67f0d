//! Brute-force reference implementations and random inputs shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use socsim::society::{EntityId, EventKind, GraphMode, InteractionEvent, RelationGraph};

pub fn id(i: usize) -> EntityId {
    EntityId::new(format!("v{i:02}"))
}

/// Directed graph on `n` nodes, each ordered pair linked with probability `p`.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, p: f64) -> RelationGraph {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < p {
                pairs.push((id(u), id(v)));
            }
        }
    }
    RelationGraph::from_pairs((0..n).map(id), pairs)
}

/// Graph with one directed edge per linked unordered pair, in a random
/// direction.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> RelationGraph {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                if rng.random::<bool>() {
                    pairs.push((id(u), id(v)));
                } else {
                    pairs.push((id(v), id(u)));
                }
            }
        }
    }
    RelationGraph::from_pairs((0..n).map(id), pairs)
}

/// Adjacency sets built straight from the edge list.
pub fn adjacency(g: &RelationGraph, mode: GraphMode) -> BTreeMap<EntityId, BTreeSet<EntityId>> {
    let mut adj: BTreeMap<EntityId, BTreeSet<EntityId>> = g
        .nodes()
        .iter()
        .map(|v| (v.clone(), BTreeSet::new()))
        .collect();
    for e in g.edges() {
        adj.get_mut(&e.initiator)
            .unwrap()
            .insert(e.receiver.clone());
        if mode == GraphMode::Symmetrized {
            adj.get_mut(&e.receiver)
                .unwrap()
                .insert(e.initiator.clone());
        }
    }
    adj
}

/// All-pairs hop distances by Floyd-Warshall.
pub fn distances(
    adj: &BTreeMap<EntityId, BTreeSet<EntityId>>,
) -> BTreeMap<(EntityId, EntityId), usize> {
    let nodes: Vec<&EntityId> = adj.keys().collect();
    let n = nodes.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, u) in nodes.iter().enumerate() {
        d[i][i] = 0;
        for (j, v) in nodes.iter().enumerate() {
            if adj[*u].contains(*v) {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if d[i][j] < inf {
                out.insert((nodes[i].clone(), nodes[j].clone()), d[i][j]);
            }
        }
    }
    out
}

pub fn oracle_closeness(g: &RelationGraph, mode: GraphMode) -> BTreeMap<EntityId, f64> {
    let adj = adjacency(g, mode);
    let d = distances(&adj);
    adj.keys()
        .map(|s| {
            let total: usize = adj
                .keys()
                .filter(|t| *t != s)
                .filter_map(|t| d.get(&(s.clone(), t.clone())))
                .sum();
            (s.clone(), if total == 0 { 0.0 } else { 1.0 / total as f64 })
        })
        .collect()
}

fn shortest_paths(
    adj: &BTreeMap<EntityId, BTreeSet<EntityId>>,
    d: &BTreeMap<(EntityId, EntityId), usize>,
    s: &EntityId,
    t: &EntityId,
) -> Vec<Vec<EntityId>> {
    fn walk(
        adj: &BTreeMap<EntityId, BTreeSet<EntityId>>,
        target: &EntityId,
        left: usize,
        path: &mut Vec<EntityId>,
        out: &mut Vec<Vec<EntityId>>,
    ) {
        let here = path.last().unwrap().clone();
        if left == 0 {
            if &here == target {
                out.push(path.clone());
            }
            return;
        }
        for next in &adj[&here] {
            if !path.contains(next) {
                path.push(next.clone());
                walk(adj, target, left - 1, path, out);
                path.pop();
            }
        }
    }
    let Some(&len) = d.get(&(s.clone(), t.clone())) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    walk(adj, t, len, &mut vec![s.clone()], &mut out);
    out
}

/// Betweenness by enumerating every shortest path of every pair; unordered
/// pairs in symmetrized mode.
pub fn oracle_betweenness(g: &RelationGraph, mode: GraphMode) -> BTreeMap<EntityId, f64> {
    let adj = adjacency(g, mode);
    let d = distances(&adj);
    let mut score: BTreeMap<EntityId, f64> = adj.keys().map(|v| (v.clone(), 0.0)).collect();
    for s in adj.keys() {
        for t in adj.keys() {
            if s == t || (mode == GraphMode::Symmetrized && s > t) {
                continue;
            }
            let paths = shortest_paths(&adj, &d, s, t);
            if paths.is_empty() {
                continue;
            }
            let total = paths.len() as f64;
            for v in adj.keys().filter(|v| *v != s && *v != t) {
                let through = paths.iter().filter(|p| p.contains(v)).count() as f64;
                *score.get_mut(v).unwrap() += through / total;
            }
        }
    }
    score
}

/// CPM by listing all k-subsets that are cliques and merging any two that
/// share k-1 nodes until nothing changes.
pub fn oracle_cpm(g: &RelationGraph, k: usize) -> BTreeSet<BTreeSet<EntityId>> {
    let adj = adjacency(g, GraphMode::Symmetrized);
    let nodes: Vec<&EntityId> = adj.keys().collect();
    let mut cliques: Vec<BTreeSet<EntityId>> = Vec::new();
    let n = nodes.len();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let members: Vec<&EntityId> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| nodes[i])
            .collect();
        let complete = members
            .iter()
            .all(|a| members.iter().all(|b| a == b || adj[*a].contains(*b)));
        if complete {
            cliques.push(members.into_iter().cloned().collect());
        }
    }
    let mut component: Vec<usize> = (0..cliques.len()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..cliques.len() {
            for j in 0..cliques.len() {
                let shared = cliques[i].intersection(&cliques[j]).count();
                if shared == k - 1 && component[i] != component[j] {
                    let (lo, hi) = (
                        component[i].min(component[j]),
                        component[i].max(component[j]),
                    );
                    component
                        .iter_mut()
                        .filter(|c| **c == hi)
                        .for_each(|c| *c = lo);
                    changed = true;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<EntityId>> = BTreeMap::new();
    for (i, c) in component.iter().enumerate() {
        groups
            .entry(*c)
            .or_default()
            .extend(cliques[i].iter().cloned());
    }
    groups.into_values().collect()
}

fn neighbours(g: &RelationGraph) -> BTreeMap<EntityId, BTreeSet<EntityId>> {
    adjacency(g, GraphMode::Symmetrized)
}

pub fn oracle_cn(g: &RelationGraph, u: &EntityId, v: &EntityId) -> f64 {
    let nb = neighbours(g);
    nb[u].intersection(&nb[v]).count() as f64
}

pub fn oracle_aa(g: &RelationGraph, u: &EntityId, v: &EntityId) -> f64 {
    let nb = neighbours(g);
    nb[u]
        .intersection(&nb[v])
        .map(|z| 1.0 / (nb[z].len() as f64).ln())
        .sum()
}

pub fn oracle_pa(g: &RelationGraph, u: &EntityId, v: &EntityId) -> f64 {
    let nb = neighbours(g);
    (nb[u].len() * nb[v].len()) as f64
}

/// Time-sorted random interactions among `n` entities.
pub fn random_stream<R: Rng>(
    rng: &mut R,
    n: usize,
    len: usize,
    horizon: i64,
) -> Vec<InteractionEvent> {
    let mut events: Vec<InteractionEvent> = (0..len)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let kind = EventKind::ALL[rng.random_range(0..EventKind::ALL.len())];
            let strength = rng.random_range(1..=8) as f64 * 0.25;
            InteractionEvent::new(rng.random_range(0..horizon), id(a), id(b), kind, strength)
        })
        .collect();
    events.sort_by_key(|e| e.time);
    events
}

/// Relation graph rebuilt from per-agent `cr_update` calls, feeding each
/// agent its own events one timestamp at a time.
pub fn agent_relations(
    events: &[InteractionEvent],
    psi: &socsim::society::PsiConfig,
    now: i64,
) -> RelationGraph {
    use socsim::roles::RoleProfile;
    use socsim::simulator::{cr_update, AgentProfile, AgentState, BehaviorParams, DecisionParams};

    let b = BehaviorParams::default();
    let profile = AgentProfile {
        activity: Default::default(),
        params: DecisionParams::inert(&b),
    };
    let mut agents: BTreeMap<EntityId, AgentState> = BTreeMap::new();
    let mut g = RelationGraph::new(now);
    for e in events {
        g.add_node(e.initiator.clone());
        g.add_node(e.receiver.clone());
        agents.entry(e.initiator.clone()).or_insert_with(|| {
            AgentState::new(
                e.initiator.clone(),
                &profile,
                RoleProfile::from_strengths(Default::default()),
            )
        });
    }
    let mut rest = events;
    while let Some(first) = rest.first() {
        let cut = rest
            .iter()
            .position(|e| e.time != first.time)
            .unwrap_or(rest.len());
        let (now_batch, later) = rest.split_at(cut);
        for a in agents.values_mut() {
            cr_update(a, now_batch, psi, 16);
        }
        rest = later;
    }
    for a in agents.values() {
        for edge in a.relation_view(psi, now) {
            g.insert_edge(edge);
        }
    }
    g
}
