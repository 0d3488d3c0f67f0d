use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::event::{EntityId, Timestamp};

/// Bag-of-words token counts.
pub type TokenCounts = BTreeMap<String, u64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationEdge {
    pub initiator: EntityId,
    pub receiver: EntityId,
    /// In `(0, 1]`.
    pub strength: f64,
    #[serde(default)]
    pub semantics: TokenCounts,
}

/// Weighted directed relations at one point in time. At most one edge per
/// ordered pair. Nodes may be isolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GraphRepr", from = "GraphRepr")]
pub struct RelationGraph {
    pub as_of: Timestamp,
    nodes: BTreeSet<EntityId>,
    edges: BTreeMap<(EntityId, EntityId), RelationEdge>,
}

/// Serialized form: node list plus edge list sorted by pair.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    as_of: Timestamp,
    nodes: Vec<EntityId>,
    edges: Vec<RelationEdge>,
}

impl From<RelationGraph> for GraphRepr {
    fn from(g: RelationGraph) -> Self {
        GraphRepr {
            as_of: g.as_of,
            nodes: g.nodes.into_iter().collect(),
            edges: g.edges.into_values().collect(),
        }
    }
}

impl From<GraphRepr> for RelationGraph {
    fn from(r: GraphRepr) -> Self {
        let mut g = RelationGraph::new(r.as_of);
        for n in r.nodes {
            g.add_node(n);
        }
        for e in r.edges {
            g.insert_edge(e);
        }
        g
    }
}

/// Which topology a graph algorithm runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    Directed,
    #[default]
    Symmetrized,
}

impl RelationGraph {
    pub fn new(as_of: Timestamp) -> Self {
        RelationGraph {
            as_of,
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }

    /// Unit-strength graph from an edge list; handy for tests and bindings.
    pub fn from_pairs<I, A, B>(nodes: impl IntoIterator<Item = EntityId>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<EntityId>,
        B: Into<EntityId>,
    {
        let mut g = RelationGraph::new(0);
        for n in nodes {
            g.add_node(n);
        }
        for (u, v) in pairs {
            let (u, v) = (u.into(), v.into());
            if u != v {
                g.insert_edge(RelationEdge {
                    initiator: u,
                    receiver: v,
                    strength: 1.0,
                    semantics: TokenCounts::new(),
                });
            }
        }
        g
    }

    pub fn add_node(&mut self, id: EntityId) {
        self.nodes.insert(id);
    }

    /// Inserts or replaces the edge for its ordered pair; endpoints become nodes.
    pub fn insert_edge(&mut self, edge: RelationEdge) {
        debug_assert!(edge.initiator != edge.receiver);
        self.nodes.insert(edge.initiator.clone());
        self.nodes.insert(edge.receiver.clone());
        self.edges
            .insert((edge.initiator.clone(), edge.receiver.clone()), edge);
    }

    pub fn nodes(&self) -> &BTreeSet<EntityId> {
        &self.nodes
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.nodes.contains(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = &RelationEdge> {
        self.edges.values()
    }

    pub fn edge(&self, u: &EntityId, v: &EntityId) -> Option<&RelationEdge> {
        self.edges.get(&(u.clone(), v.clone()))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Same nodes, every edge flipped.
    pub fn reversed(&self) -> RelationGraph {
        let mut g = RelationGraph::new(self.as_of);
        g.nodes = self.nodes.clone();
        for e in self.edges.values() {
            let mut r = e.clone();
            std::mem::swap(&mut r.initiator, &mut r.receiver);
            g.insert_edge(r);
        }
        g
    }

    /// Restrict to `keep`, dropping edges with an endpoint outside it.
    pub fn induced(&self, keep: &BTreeSet<EntityId>) -> RelationGraph {
        let mut g = RelationGraph::new(self.as_of);
        g.nodes = self.nodes.intersection(keep).cloned().collect();
        for e in self.edges.values() {
            if keep.contains(&e.initiator) && keep.contains(&e.receiver) {
                g.insert_edge(e.clone());
            }
        }
        g
    }

    pub fn indexed(&self) -> IndexedGraph {
        IndexedGraph::new(self)
    }
}

/// Dense index view over a [`RelationGraph`]: node `i` is the `i`-th id in
/// lexicographic order. Adjacency lists are sorted and duplicate-free.
#[derive(Debug, Clone)]
pub struct IndexedGraph {
    pub ids: Vec<EntityId>,
    pub out: Vec<Vec<usize>>,
    pub inc: Vec<Vec<usize>>,
    /// Symmetrized adjacency with weight `max(s(u,v), s(v,u))`.
    pub und: Vec<BTreeMap<usize, f64>>,
}

impl IndexedGraph {
    fn new(g: &RelationGraph) -> Self {
        let ids: Vec<EntityId> = g.nodes.iter().cloned().collect();
        let n = ids.len();
        let index: BTreeMap<&EntityId, usize> =
            ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut und = vec![BTreeMap::new(); n];
        for e in g.edges.values() {
            let (u, v) = (index[&e.initiator], index[&e.receiver]);
            out[u].push(v);
            inc[v].push(u);
            for (a, b) in [(u, v), (v, u)] {
                let w = und[a].entry(b).or_insert(0.0_f64);
                *w = w.max(e.strength);
            }
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
        }
        IndexedGraph { ids, out, inc, und }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &EntityId) -> Option<usize> {
        self.ids.binary_search(id).ok()
    }

    /// Successor lists for the requested topology.
    pub fn successors(&self, mode: GraphMode) -> Vec<Vec<usize>> {
        match mode {
            GraphMode::Directed => self.out.clone(),
            GraphMode::Symmetrized => self
                .und
                .iter()
                .map(|m| m.keys().copied().collect())
                .collect(),
        }
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.und[i].keys().copied()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.und[i].len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.und[i].contains_key(&j)
    }
}
