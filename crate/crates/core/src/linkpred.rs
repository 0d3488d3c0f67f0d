//! Neighbourhood-based link prediction on the symmetrized relation graph.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::society::{EntityId, IndexedGraph, RelationGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkModel {
    #[serde(rename = "CN")]
    CommonNeighbours,
    #[serde(rename = "AA")]
    AdamicAdar,
    #[serde(rename = "PA")]
    PreferentialAttachment,
    #[serde(rename = "FOAF")]
    FriendOfAFriend,
}

impl LinkModel {
    pub const ALL: [LinkModel; 4] = [
        LinkModel::CommonNeighbours,
        LinkModel::AdamicAdar,
        LinkModel::PreferentialAttachment,
        LinkModel::FriendOfAFriend,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkModel::CommonNeighbours => "CN",
            LinkModel::AdamicAdar => "AA",
            LinkModel::PreferentialAttachment => "PA",
            LinkModel::FriendOfAFriend => "FOAF",
        }
    }
}

impl fmt::Display for LinkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LinkModel::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown link model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    /// Pairs at hop distance exactly two.
    #[default]
    Foaf,
    /// Every unlinked pair.
    AllNonEdges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub u: EntityId,
    pub v: EntityId,
    pub score: f64,
    pub model: LinkModel,
}

fn lookup(ix: &IndexedGraph, id: &EntityId) -> Result<usize> {
    ix.index_of(id)
        .ok_or_else(|| Error::UnknownEntity(id.clone()))
}

fn common(ix: &IndexedGraph, u: usize, v: usize) -> impl Iterator<Item = usize> + '_ {
    ix.neighbors(u).filter(move |&z| ix.adjacent(v, z))
}

fn cn(ix: &IndexedGraph, u: usize, v: usize) -> f64 {
    common(ix, u, v).count() as f64
}

fn aa(ix: &IndexedGraph, u: usize, v: usize) -> f64 {
    common(ix, u, v)
        .map(|z| 1.0 / (ix.degree(z) as f64).ln())
        .sum()
}

fn pa(ix: &IndexedGraph, u: usize, v: usize) -> f64 {
    (ix.degree(u) * ix.degree(v)) as f64
}

fn foaf_of(ix: &IndexedGraph, u: usize) -> BTreeSet<usize> {
    ix.neighbors(u)
        .flat_map(|z| ix.neighbors(z))
        .filter(|&w| w != u && !ix.adjacent(u, w))
        .collect()
}

/// Nodes exactly two hops from `u`.
pub fn foaf_candidates(g: &RelationGraph, u: &EntityId) -> Result<BTreeSet<EntityId>> {
    let ix = g.indexed();
    let ui = lookup(&ix, u)?;
    Ok(foaf_of(&ix, ui)
        .into_iter()
        .map(|i| ix.ids[i].clone())
        .collect())
}

fn pair_score(
    g: &RelationGraph,
    u: &EntityId,
    v: &EntityId,
    f: fn(&IndexedGraph, usize, usize) -> f64,
) -> Result<f64> {
    let ix = g.indexed();
    let (ui, vi) = (lookup(&ix, u)?, lookup(&ix, v)?);
    Ok(f(&ix, ui, vi))
}

/// `|Γ(u) ∩ Γ(v)|`.
pub fn score_cn(g: &RelationGraph, u: &EntityId, v: &EntityId) -> Result<f64> {
    pair_score(g, u, v, cn)
}

/// `Σ 1 / ln deg(z)` over common neighbours `z`.
pub fn score_aa(g: &RelationGraph, u: &EntityId, v: &EntityId) -> Result<f64> {
    pair_score(g, u, v, aa)
}

/// `deg(u) · deg(v)`.
pub fn score_pa(g: &RelationGraph, u: &EntityId, v: &EntityId) -> Result<f64> {
    pair_score(g, u, v, pa)
}

/// Top-`k` unlinked pairs, ordered by score descending then `(u, v)`
/// ascending. FOAF gives every two-hop pair score 1 and breaks ties by
/// common-neighbour count before the pair order.
pub fn predict_topk(
    g: &RelationGraph,
    model: LinkModel,
    k: usize,
    policy: CandidatePolicy,
) -> Vec<CandidatePair> {
    let ix = g.indexed();
    let n = ix.len();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let policy = if model == LinkModel::FriendOfAFriend {
        CandidatePolicy::Foaf
    } else {
        policy
    };
    match policy {
        CandidatePolicy::Foaf => {
            for u in 0..n {
                pairs.extend(
                    foaf_of(&ix, u)
                        .into_iter()
                        .filter(|&v| v > u)
                        .map(|v| (u, v)),
                );
            }
        }
        CandidatePolicy::AllNonEdges => {
            for u in 0..n {
                pairs.extend((u + 1..n).filter(|&v| !ix.adjacent(u, v)).map(|v| (u, v)));
            }
        }
    }
    let mut scored: Vec<(f64, f64, usize, usize)> = pairs
        .into_iter()
        .map(|(u, v)| match model {
            LinkModel::CommonNeighbours => (cn(&ix, u, v), 0.0, u, v),
            LinkModel::AdamicAdar => (aa(&ix, u, v), 0.0, u, v),
            LinkModel::PreferentialAttachment => (pa(&ix, u, v), 0.0, u, v),
            LinkModel::FriendOfAFriend => (1.0, cn(&ix, u, v), u, v),
        })
        .collect();
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then((a.2, a.3).cmp(&(b.2, b.3)))
    });
    scored
        .into_iter()
        .take(k)
        .map(|(score, _, u, v)| CandidatePair {
            u: ix.ids[u].clone(),
            v: ix.ids[v].clone(),
            score,
            model,
        })
        .collect()
}

fn unordered(u: &EntityId, v: &EntityId) -> (EntityId, EntityId) {
    if u <= v {
        (u.clone(), v.clone())
    } else {
        (v.clone(), u.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionScore {
    pub precision_at_k: f64,
    pub recall_at_k: f64,
}

/// Precision and recall of the top-`k` list against the edges that appeared.
/// Precision divides by `k`, so a short list is penalized.
pub fn evaluate_prediction(
    train: &RelationGraph,
    appeared: &BTreeSet<(EntityId, EntityId)>,
    model: LinkModel,
    k: usize,
    policy: CandidatePolicy,
) -> Result<PredictionScore> {
    let truth: BTreeSet<_> = appeared.iter().map(|(u, v)| unordered(u, v)).collect();
    if truth.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if k == 0 {
        return Err(Error::BadConfig("k must be at least 1".into()));
    }
    let hits = predict_topk(train, model, k, policy)
        .iter()
        .filter(|c| truth.contains(&unordered(&c.u, &c.v)))
        .count() as f64;
    Ok(PredictionScore {
        precision_at_k: hits / k as f64,
        recall_at_k: hits / truth.len() as f64,
    })
}

/// Undirected edges of `later` absent from `earlier`.
pub fn new_edges(earlier: &RelationGraph, later: &RelationGraph) -> BTreeSet<(EntityId, EntityId)> {
    let old: BTreeSet<_> = earlier
        .edges()
        .map(|e| unordered(&e.initiator, &e.receiver))
        .collect();
    later
        .edges()
        .map(|e| unordered(&e.initiator, &e.receiver))
        .filter(|p| !old.contains(p))
        .collect()
}

/// CSV `model,u,v,score,rank` with 1-based ranks.
pub fn write_predictions_csv<W: std::io::Write>(preds: &[CandidatePair], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["model", "u", "v", "score", "rank"])?;
    for (rank, p) in preds.iter().enumerate() {
        wtr.write_record([
            p.model.as_str(),
            p.u.as_str(),
            p.v.as_str(),
            &p.score.to_string(),
            &(rank + 1).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(pairs: &[(&str, &str)]) -> RelationGraph {
        RelationGraph::from_pairs(std::iter::empty(), pairs.iter().copied())
    }

    fn id(s: &str) -> EntityId {
        EntityId::from(s)
    }

    #[test]
    fn foaf_examples() {
        let path = graph(&[("a", "b"), ("b", "c")]);
        assert_eq!(
            foaf_candidates(&path, &id("a")).unwrap(),
            BTreeSet::from([id("c")])
        );
        let tri = graph(&[("a", "b"), ("b", "c"), ("a", "c")]);
        assert!(foaf_candidates(&tri, &id("a")).unwrap().is_empty());
        let star = graph(&[("c", "x"), ("c", "y"), ("c", "z")]);
        assert!(foaf_candidates(&star, &id("c")).unwrap().is_empty());
        assert_eq!(
            foaf_candidates(&star, &id("x")).unwrap(),
            BTreeSet::from([id("y"), id("z")])
        );
        assert!(matches!(
            foaf_candidates(&star, &id("q")),
            Err(Error::UnknownEntity(_))
        ));
    }

    #[test]
    fn score_examples() {
        let g = graph(&[("a", "b"), ("a", "c")]);
        assert_eq!(score_cn(&g, &id("b"), &id("c")).unwrap(), 1.0);
        assert!((score_aa(&g, &id("b"), &id("c")).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert!(
            (score_aa(&g, &id("b"), &id("c")).unwrap() - std::f64::consts::LOG2_E).abs() < 1e-12
        );
        assert_eq!(score_pa(&g, &id("b"), &id("c")).unwrap(), 1.0);

        let apart = graph(&[("a", "b"), ("c", "d")]);
        assert_eq!(score_cn(&apart, &id("a"), &id("c")).unwrap(), 0.0);
        assert_eq!(score_aa(&apart, &id("a"), &id("c")).unwrap(), 0.0);

        let k4_minus = graph(&[("u", "a"), ("u", "b"), ("v", "a"), ("v", "b"), ("a", "b")]);
        assert_eq!(score_cn(&k4_minus, &id("u"), &id("v")).unwrap(), 2.0);

        let hub = graph(&[("z", "b"), ("z", "c"), ("z", "d"), ("z", "e")]);
        assert!((score_aa(&hub, &id("b"), &id("c")).unwrap() - 1.0 / 4f64.ln()).abs() < 1e-12);

        let mut iso = graph(&[("a", "b"), ("a", "c"), ("b", "c"), ("c", "d")]);
        iso.add_node(id("q"));
        assert_eq!(score_pa(&iso, &id("q"), &id("a")).unwrap(), 0.0);
        assert_eq!(score_pa(&iso, &id("c"), &id("a")).unwrap(), 6.0);
    }

    #[test]
    fn topk_examples() {
        let path = graph(&[("a", "b"), ("b", "c")]);
        let top = predict_topk(&path, LinkModel::CommonNeighbours, 1, CandidatePolicy::Foaf);
        assert_eq!(top.len(), 1);
        assert_eq!(
            (top[0].u.as_str(), top[0].v.as_str(), top[0].score),
            ("a", "c", 1.0)
        );

        assert!(predict_topk(
            &RelationGraph::new(0),
            LinkModel::AdamicAdar,
            5,
            CandidatePolicy::Foaf
        )
        .is_empty());

        // (a,c) and (a,d) both have one common neighbour: lexicographic first wins.
        let tie = graph(&[("a", "b"), ("b", "c"), ("b", "d"), ("c", "d")]);
        let top = predict_topk(&tie, LinkModel::CommonNeighbours, 1, CandidatePolicy::Foaf);
        assert_eq!((top[0].u.as_str(), top[0].v.as_str()), ("a", "c"));
    }

    #[test]
    fn evaluation_examples() {
        let path = graph(&[("a", "b"), ("b", "c")]);
        let hit = BTreeSet::from([(id("c"), id("a"))]);
        let s = evaluate_prediction(
            &path,
            &hit,
            LinkModel::CommonNeighbours,
            1,
            CandidatePolicy::Foaf,
        )
        .unwrap();
        assert_eq!((s.precision_at_k, s.recall_at_k), (1.0, 1.0));

        let miss = BTreeSet::from([(id("a"), id("z"))]);
        let s = evaluate_prediction(
            &path,
            &miss,
            LinkModel::CommonNeighbours,
            1,
            CandidatePolicy::Foaf,
        )
        .unwrap();
        assert_eq!((s.precision_at_k, s.recall_at_k), (0.0, 0.0));

        let square = graph(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
        let half = BTreeSet::from([(id("a"), id("c")), (id("x"), id("y"))]);
        let s = evaluate_prediction(
            &square,
            &half,
            LinkModel::CommonNeighbours,
            2,
            CandidatePolicy::Foaf,
        )
        .unwrap();
        assert_eq!((s.precision_at_k, s.recall_at_k), (0.5, 0.5));

        assert!(matches!(
            evaluate_prediction(
                &square,
                &BTreeSet::new(),
                LinkModel::CommonNeighbours,
                2,
                CandidatePolicy::Foaf
            ),
            Err(Error::EmptyTestSet)
        ));
    }
}
