//! Network measures over a [`RelationGraph`].
//!
//! All measures use the unweighted topology; relation strengths only matter
//! for deciding which edges exist.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::society::{EntityId, GraphMode, IndexedGraph, RelationGraph, SocietySnapshot, SNA};

/// One value per entity.
pub type MetricVector = BTreeMap<EntityId, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    InDegree,
    OutDegree,
    Closeness,
    Betweenness,
    Hub,
    Authority,
    Pagerank,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::InDegree,
        Metric::OutDegree,
        Metric::Closeness,
        Metric::Betweenness,
        Metric::Hub,
        Metric::Authority,
        Metric::Pagerank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::InDegree => "in_degree",
            Metric::OutDegree => "out_degree",
            Metric::Closeness => "closeness",
            Metric::Betweenness => "betweenness",
            Metric::Hub => "hub",
            Metric::Authority => "authority",
            Metric::Pagerank => "pagerank",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnaParams {
    /// Topology for closeness and betweenness.
    pub mode: GraphMode,
    pub damping: f64,
    pub iters: usize,
    pub tol: f64,
}

impl Default for SnaParams {
    fn default() -> Self {
        SnaParams {
            mode: GraphMode::Symmetrized,
            damping: 0.85,
            iters: 200,
            tol: 1e-10,
        }
    }
}

impl SnaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::BadConfig(format!(
                "damping must be in (0, 1), got {}",
                self.damping
            )));
        }
        if self.iters == 0 || !(self.tol > 0.0) {
            return Err(Error::BadConfig(
                "iteration count and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn to_vector(ix: &IndexedGraph, values: Vec<f64>) -> MetricVector {
    ix.ids.iter().cloned().zip(values).collect()
}

/// Unweighted `(in, out)` degrees.
pub fn degrees(g: &RelationGraph) -> (MetricVector, MetricVector) {
    let ix = g.indexed();
    let ins = ix.inc.iter().map(|l| l.len() as f64).collect();
    let outs = ix.out.iter().map(|l| l.len() as f64).collect();
    (to_vector(&ix, ins), to_vector(&ix, outs))
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or(0);
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// `1 / Σ d(v, u)` over nodes `u` reachable from `v`; 0 for nodes that
/// reach nothing.
pub fn closeness(g: &RelationGraph, mode: GraphMode) -> MetricVector {
    let ix = g.indexed();
    let adj = ix.successors(mode);
    let values = (0..ix.len())
        .map(|v| {
            let total: usize = bfs_distances(&adj, v).into_iter().flatten().sum();
            if total == 0 {
                0.0
            } else {
                1.0 / total as f64
            }
        })
        .collect();
    to_vector(&ix, values)
}

/// Brandes' dependency accumulation; unnormalized. In symmetrized mode each
/// unordered pair counts once.
pub fn betweenness(g: &RelationGraph, mode: GraphMode) -> MetricVector {
    let ix = g.indexed();
    let adj = ix.successors(mode);
    let n = ix.len();
    let mut score = vec![0.0; n];

    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0_f64; n];
    let mut dist = vec![-1_i64; n];
    let mut delta = vec![0.0_f64; n];
    let mut queue = VecDeque::new();

    for s in 0..n {
        stack.clear();
        for p in preds.iter_mut() {
            p.clear();
        }
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = -1);
        delta.iter_mut().for_each(|x| *x = 0.0);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                score[w] += delta[w];
            }
        }
    }
    if mode == GraphMode::Symmetrized {
        score.iter_mut().for_each(|x| *x /= 2.0);
    }
    to_vector(&ix, score)
}

fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// One power iteration sequence `x <- second(first(x))`, L2-normalized.
fn reinforce(
    n: usize,
    first: &[Vec<usize>],
    second: &[Vec<usize>],
    iters: usize,
    tol: f64,
) -> Vec<f64> {
    // first[v] lists the nodes that pass score into v on the half step.
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..iters {
        let mut mid: Vec<f64> = first
            .iter()
            .map(|src| src.iter().map(|&u| x[u]).sum())
            .collect();
        l2_normalize(&mut mid);
        let mut next: Vec<f64> = second
            .iter()
            .map(|src| src.iter().map(|&u| mid[u]).sum())
            .collect();
        l2_normalize(&mut next);
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if change < tol {
            break;
        }
    }
    x
}

/// HITS `(hub, authority)` by power iteration on the unweighted adjacency.
///
/// Hubs iterate `h <- A (Aᵀ h)` and authorities `a <- Aᵀ (A a)`, both from
/// the uniform unit vector, so reversing every edge exactly swaps the two.
pub fn hits(g: &RelationGraph, iters: usize, tol: f64) -> Result<(MetricVector, MetricVector)> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if iters == 0 || !(tol > 0.0) {
        return Err(Error::BadConfig("hits needs iters >= 1 and tol > 0".into()));
    }
    let ix = g.indexed();
    let n = ix.len();
    // Aᵀh at v sums over in-neighbours, A a at u over out-neighbours.
    let hub = reinforce(n, &ix.inc, &ix.out, iters, tol);
    let authority = reinforce(n, &ix.out, &ix.inc, iters, tol);
    Ok((to_vector(&ix, hub), to_vector(&ix, authority)))
}

/// Damped random-surfer fixpoint on unweighted out-links. Dangling nodes
/// spread their mass uniformly.
pub fn pagerank(g: &RelationGraph, damping: f64, iters: usize, tol: f64) -> Result<MetricVector> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !(damping > 0.0 && damping < 1.0) || iters == 0 || !(tol > 0.0) {
        return Err(Error::BadConfig(
            "pagerank needs 0 < damping < 1, iters >= 1, tol > 0".into(),
        ));
    }
    let ix = g.indexed();
    let n = ix.len();
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    for _ in 0..iters {
        let dangling: f64 = (0..n)
            .filter(|&v| ix.out[v].is_empty())
            .map(|v| rank[v])
            .sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let next: Vec<f64> = (0..n)
            .map(|v| {
                let inflow: f64 = ix.inc[v]
                    .iter()
                    .map(|&u| rank[u] / ix.out[u].len() as f64)
                    .sum();
                base + damping * inflow
            })
            .collect();
        let change: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        rank = next;
        if change < tol {
            break;
        }
    }
    let total: f64 = rank.iter().sum();
    rank.iter_mut().for_each(|x| *x /= total);
    Ok(to_vector(&ix, rank))
}

/// All seven measures, keyed by metric.
pub fn all_metrics(g: &RelationGraph, p: &SnaParams) -> Result<BTreeMap<Metric, MetricVector>> {
    let mut out = BTreeMap::new();
    if g.node_count() == 0 {
        return Ok(out);
    }
    let (ins, outs) = degrees(g);
    let (hub, auth) = hits(g, p.iters, p.tol)?;
    out.insert(Metric::InDegree, ins);
    out.insert(Metric::OutDegree, outs);
    out.insert(Metric::Closeness, closeness(g, p.mode));
    out.insert(Metric::Betweenness, betweenness(g, p.mode));
    out.insert(Metric::Hub, hub);
    out.insert(Metric::Authority, auth);
    out.insert(Metric::Pagerank, pagerank(g, p.damping, p.iters, p.tol)?);
    Ok(out)
}

/// Recompute the `sna` attribute namespace from the snapshot's relations.
pub fn annotate_sna(s: &mut SocietySnapshot, p: &SnaParams) -> Result<()> {
    s.attributes.clear_namespace(SNA);
    let mut g = s.relations.clone();
    for id in &s.entities {
        g.add_node(id.clone());
    }
    for (metric, values) in all_metrics(&g, p)? {
        for (id, v) in values {
            s.attributes.set(&id, SNA, metric.as_str(), v);
        }
    }
    Ok(())
}

/// Rows `(entity, metric, value)` sorted by `(metric, entity)`.
pub fn metric_rows(metrics: &BTreeMap<Metric, MetricVector>) -> Vec<(EntityId, Metric, f64)> {
    let mut rows: Vec<_> = metrics
        .iter()
        .flat_map(|(m, vals)| vals.iter().map(move |(id, v)| (id.clone(), *m, *v)))
        .collect();
    rows.sort_by(|a, b| a.1.as_str().cmp(b.1.as_str()).then_with(|| a.0.cmp(&b.0)));
    rows
}

pub fn write_metrics_csv<W: std::io::Write>(
    metrics: &BTreeMap<Metric, MetricVector>,
    writer: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["entity", "metric", "value"])?;
    for (id, m, v) in metric_rows(metrics) {
        wtr.write_record([id.as_str(), m.as_str(), &v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: &[&str], pairs: &[(&str, &str)]) -> RelationGraph {
        RelationGraph::from_pairs(
            nodes.iter().map(|n| EntityId::from(*n)),
            pairs.iter().copied(),
        )
    }

    fn at(v: &MetricVector, id: &str) -> f64 {
        v[&EntityId::from(id)]
    }

    #[test]
    fn degree_examples() {
        let g = graph(&["a", "b", "c", "d"], &[("a", "b"), ("a", "c")]);
        let (ins, outs) = degrees(&g);
        assert_eq!(at(&outs, "a"), 2.0);
        assert_eq!(at(&ins, "b"), 1.0);
        assert_eq!(at(&ins, "c"), 1.0);
        assert_eq!(at(&ins, "d") + at(&outs, "d"), 0.0);

        let (ins, outs) = degrees(&graph(&["a", "b"], &[]));
        assert!(ins.values().chain(outs.values()).all(|&x| x == 0.0));

        let (ins, outs) = degrees(&graph(&[], &[("a", "b"), ("b", "a")]));
        assert!(ins.values().chain(outs.values()).all(|&x| x == 1.0));
    }

    #[test]
    fn closeness_examples() {
        let star = graph(&[], &[("c", "x"), ("c", "y"), ("c", "z")]);
        let cl = closeness(&star, GraphMode::Symmetrized);
        assert!((at(&cl, "c") - 1.0 / 3.0).abs() < 1e-12);
        assert!((at(&cl, "x") - 0.2).abs() < 1e-12);

        let pair = closeness(&graph(&[], &[("a", "b")]), GraphMode::Symmetrized);
        assert_eq!(at(&pair, "a"), 1.0);
        assert_eq!(at(&pair, "b"), 1.0);

        let iso = closeness(&graph(&["q"], &[("a", "b")]), GraphMode::Symmetrized);
        assert_eq!(at(&iso, "q"), 0.0);
    }

    #[test]
    fn betweenness_examples() {
        let path = graph(&[], &[("a", "b"), ("b", "c")]);
        let b = betweenness(&path, GraphMode::Symmetrized);
        assert_eq!(at(&b, "b"), 1.0);
        assert_eq!(at(&b, "a"), 0.0);
        assert_eq!(at(&b, "c"), 0.0);

        let directed = betweenness(&path, GraphMode::Directed);
        assert_eq!(at(&directed, "b"), 1.0);

        let k4: Vec<_> = [
            ("a", "b"),
            ("a", "c"),
            ("a", "d"),
            ("b", "c"),
            ("b", "d"),
            ("c", "d"),
        ]
        .into_iter()
        .collect();
        let b = betweenness(&graph(&[], &k4), GraphMode::Symmetrized);
        assert!(b.values().all(|&x| x == 0.0));
    }

    #[test]
    fn hits_examples() {
        let (hub, auth) = hits(&graph(&[], &[("a", "b")]), 200, 1e-10).unwrap();
        assert_eq!((at(&hub, "a"), at(&hub, "b")), (1.0, 0.0));
        assert_eq!((at(&auth, "a"), at(&auth, "b")), (0.0, 1.0));

        let (hub, auth) = hits(&graph(&[], &[("a", "b"), ("b", "a")]), 200, 1e-10).unwrap();
        let r = 1.0 / 2f64.sqrt();
        for v in hub.values().chain(auth.values()) {
            assert!((v - r).abs() < 1e-12);
        }

        let (hub, auth) = hits(&graph(&[], &[("a", "c"), ("b", "c")]), 200, 1e-10).unwrap();
        assert!((at(&auth, "c") - 1.0).abs() < 1e-12);
        assert!((at(&hub, "a") - r).abs() < 1e-12);
        assert!((at(&hub, "b") - r).abs() < 1e-12);

        assert!(matches!(
            hits(&graph(&[], &[]), 10, 1e-9),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn pagerank_examples() {
        let cycle = graph(&[], &[("a", "b"), ("b", "c"), ("c", "a")]);
        let pr = pagerank(&cycle, 0.85, 200, 1e-10).unwrap();
        for v in pr.values() {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }

        let pr = pagerank(&graph(&["a", "b"], &[]), 0.85, 200, 1e-10).unwrap();
        assert!((at(&pr, "a") - 0.5).abs() < 1e-12);

        let pr = pagerank(&graph(&[], &[("a", "b")]), 0.85, 200, 1e-10).unwrap();
        assert!(at(&pr, "b") > at(&pr, "a"));

        assert!(matches!(
            pagerank(&graph(&[], &[]), 0.85, 10, 1e-9),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn annotate_is_idempotent() {
        let mut s = SocietySnapshot::empty(0);
        annotate_sna(&mut s, &SnaParams::default()).unwrap();
        assert!(s.attributes.namespace(SNA).is_empty());

        s.relations = graph(&[], &[("a", "b"), ("b", "c")]);
        s.entities = s.relations.nodes().clone();
        annotate_sna(&mut s, &SnaParams::default()).unwrap();
        assert_eq!(s.attributes.get(&"b".into(), SNA, "betweenness"), Some(1.0));
        let once = s.clone();
        annotate_sna(&mut s, &SnaParams::default()).unwrap();
        assert_eq!(once, s);
    }
}
