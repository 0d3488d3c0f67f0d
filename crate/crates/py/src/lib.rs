//! Python bindings: event logs, snapshots, network measures, groups, link
//! prediction, roles, simulation and comparison.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use socsim::communities::cpm_communities;
use socsim::eval::{compare_distributions, fixture_log as make_fixture, FixtureConfig};
use socsim::linkpred::{predict_topk, CandidatePolicy, LinkModel};
use socsim::roles::{RoleDistribution, UserCategory};
use socsim::simulator::SimConfig as CoreSimConfig;
use socsim::sna::{all_metrics, SnaParams};
use socsim::society::io::{read_csv, read_path, to_csv_string};
use socsim::society::{
    snapshot as core_snapshot, EntityId, EventKind, InteractionEvent, InteractionLog as CoreLog,
    RelationGraph, SocietySnapshot,
};

fn err(e: socsim::Error) -> PyErr {
    match e {
        socsim::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn graph(nodes: Option<Vec<String>>, edges: Vec<(String, String)>) -> RelationGraph {
    let nodes = nodes.unwrap_or_default().into_iter().map(EntityId::new);
    RelationGraph::from_pairs(nodes, edges)
}

fn distribution_dict(d: &RoleDistribution) -> BTreeMap<String, f64> {
    d.iter().map(|(c, v)| (c.to_string(), v)).collect()
}

fn distribution_from(d: BTreeMap<String, f64>) -> PyResult<RoleDistribution> {
    let mut out = BTreeMap::new();
    for (k, v) in d {
        let c: UserCategory = k.parse().map_err(err)?;
        out.insert(c, v);
    }
    Ok(RoleDistribution(out))
}

/// Time-ordered interaction events.
#[pyclass(module = "socsim", frozen)]
pub struct InteractionLog {
    inner: CoreLog,
}

#[pymethods]
impl InteractionLog {
    /// Records are `(time, initiator, receiver, kind, strength)`.
    #[new]
    #[pyo3(signature = (records=Vec::new()))]
    fn new(records: Vec<(i64, String, String, String, f64)>) -> PyResult<Self> {
        let events = records
            .into_iter()
            .map(|(t, a, b, kind, s)| {
                let kind: EventKind = kind.parse().map_err(err)?;
                let e = InteractionEvent::new(t, a, b, kind, s);
                e.validate().map_err(err)?;
                Ok(e)
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(InteractionLog {
            inner: CoreLog::from_events(events).map_err(err)?,
        })
    }

    /// Load a CSV or JSON-lines file.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(InteractionLog {
            inner: read_path(std::path::Path::new(path)).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(InteractionLog {
            inner: read_csv(text.as_bytes()).map_err(err)?,
        })
    }

    /// Synthetic fixture log.
    #[staticmethod]
    #[pyo3(signature = (initial=300, windows=10, seed=None))]
    fn fixture(initial: usize, windows: usize, seed: Option<u64>) -> PyResult<Self> {
        let mut fx = FixtureConfig {
            initial,
            windows,
            ..FixtureConfig::default()
        };
        if let Some(seed) = seed {
            fx.seed = seed;
        }
        Ok(InteractionLog {
            inner: make_fixture(&fx).map_err(err)?,
        })
    }

    fn to_csv(&self) -> PyResult<String> {
        to_csv_string(self.inner.events()).map_err(err)
    }

    /// `(first, last)` event times, or None when empty.
    fn span(&self) -> Option<(i64, i64)> {
        self.inner.span()
    }

    fn entities(&self) -> Vec<String> {
        self.inner
            .entities()
            .into_iter()
            .map(|e| e.to_string())
            .collect()
    }

    fn records(&self) -> Vec<(i64, String, String, String, f64)> {
        self.inner
            .events()
            .iter()
            .map(|e| {
                (
                    e.time,
                    e.initiator.to_string(),
                    e.receiver.to_string(),
                    e.kind.to_string(),
                    e.strength,
                )
            })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("InteractionLog(events={})", self.inner.len())
    }
}

/// Simulator and analysis settings, built from JSON.
#[pyclass(module = "socsim")]
pub struct SimConfig {
    inner: CoreSimConfig,
}

#[pymethods]
impl SimConfig {
    /// Missing fields take their defaults.
    #[new]
    #[pyo3(signature = (json=None))]
    fn new(json: Option<&str>) -> PyResult<Self> {
        let inner: CoreSimConfig = match json {
            Some(text) => {
                serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?
            }
            None => CoreSimConfig::default(),
        };
        inner.validate().map_err(err)?;
        Ok(SimConfig { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.seed = seed;
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[setter]
    fn set_steps(&mut self, steps: usize) {
        self.inner.steps = steps;
    }

    #[getter]
    fn step_seconds(&self) -> i64 {
        self.inner.step_seconds
    }

    #[setter]
    fn set_step_seconds(&mut self, s: i64) {
        self.inner.step_seconds = s;
    }
}

/// State of the society at one instant.
#[pyclass(module = "socsim", frozen)]
pub struct Snapshot {
    inner: SocietySnapshot,
}

#[pymethods]
impl Snapshot {
    #[getter]
    fn time(&self) -> i64 {
        self.inner.time
    }

    fn entities(&self) -> Vec<String> {
        self.inner.entities.iter().map(|e| e.to_string()).collect()
    }

    /// `(initiator, receiver, strength)` triples.
    fn relations(&self) -> Vec<(String, String, f64)> {
        self.inner
            .relations
            .edges()
            .map(|e| (e.initiator.to_string(), e.receiver.to_string(), e.strength))
            .collect()
    }

    /// Member lists of the detected groups.
    fn groups(&self) -> Vec<Vec<String>> {
        self.inner
            .groups
            .iter()
            .map(|g| g.members.iter().map(|m| m.to_string()).collect())
            .collect()
    }

    /// Entity to category name.
    fn roles(&self) -> BTreeMap<String, String> {
        self.inner
            .roles
            .iter()
            .map(|(id, r)| (id.to_string(), r.category.to_string()))
            .collect()
    }

    fn role_distribution(&self) -> PyResult<BTreeMap<String, f64>> {
        Ok(distribution_dict(
            &self.inner.role_distribution().map_err(err)?,
        ))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_canonical_json().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Snapshot(time={}, entities={}, relations={})",
            self.inner.time,
            self.inner.entities.len(),
            self.inner.relations.edge_count()
        )
    }
}

/// Analyse `log` at time `at` with the one-window settings of `config`.
#[pyfunction]
#[pyo3(signature = (log, at, config=None))]
fn snapshot(log: &InteractionLog, at: i64, config: Option<&SimConfig>) -> PyResult<Snapshot> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    Ok(Snapshot {
        inner: core_snapshot(&log.inner, at, &cfg.analysis()).map_err(err)?,
    })
}

/// Every network measure of a unit-weight graph, as metric -> node -> value.
#[pyfunction]
#[pyo3(signature = (edges, nodes=None, directed=false))]
fn metrics(
    edges: Vec<(String, String)>,
    nodes: Option<Vec<String>>,
    directed: bool,
) -> PyResult<BTreeMap<String, BTreeMap<String, f64>>> {
    let g = graph(nodes, edges);
    let params = SnaParams {
        mode: if directed {
            socsim::society::GraphMode::Directed
        } else {
            socsim::society::GraphMode::Symmetrized
        },
        ..SnaParams::default()
    };
    let all = all_metrics(&g, &params).map_err(err)?;
    Ok(all
        .into_iter()
        .map(|(m, v)| {
            let v = v.into_iter().map(|(id, x)| (id.to_string(), x)).collect();
            (m.to_string(), v)
        })
        .collect())
}

/// Clique-percolation groups of size-`k` cliques.
#[pyfunction]
#[pyo3(signature = (edges, k=3))]
fn communities(edges: Vec<(String, String)>, k: usize) -> PyResult<Vec<Vec<String>>> {
    let groups = cpm_communities(&graph(None, edges), k).map_err(err)?;
    Ok(groups
        .into_iter()
        .map(|g| g.members.into_iter().map(|m| m.to_string()).collect())
        .collect())
}

/// Top-`k` unlinked pairs as `(u, v, score)`.
#[pyfunction]
#[pyo3(signature = (edges, model="CN", k=10, all_pairs=false))]
fn predict_links(
    edges: Vec<(String, String)>,
    model: &str,
    k: usize,
    all_pairs: bool,
) -> PyResult<Vec<(String, String, f64)>> {
    let model: LinkModel = model.parse().map_err(err)?;
    let policy = if all_pairs {
        CandidatePolicy::AllNonEdges
    } else {
        CandidatePolicy::Foaf
    };
    Ok(predict_topk(&graph(None, edges), model, k, policy)
        .into_iter()
        .map(|c| (c.u.to_string(), c.v.to_string(), c.score))
        .collect())
}

/// Run the simulator from `start`. Returns the synthetic events and the
/// role distribution after each step.
#[pyfunction]
fn simulate(
    start: &Snapshot,
    config: &SimConfig,
) -> PyResult<(InteractionLog, Vec<BTreeMap<String, f64>>)> {
    let out = socsim::simulator::run(&start.inner, &config.inner).map_err(err)?;
    let trajectory = out.trajectory.iter().map(distribution_dict).collect();
    Ok((
        InteractionLog {
            inner: out.synthetic,
        },
        trajectory,
    ))
}

/// L1 distance and per-category `predicted - observed`.
#[pyfunction]
fn compare(
    observed: BTreeMap<String, f64>,
    predicted: BTreeMap<String, f64>,
) -> PyResult<(f64, BTreeMap<String, f64>)> {
    let r = compare_distributions(
        &distribution_from(observed)?,
        &distribution_from(predicted)?,
    )
    .map_err(err)?;
    let delta = r
        .per_category_delta
        .iter()
        .map(|(c, v)| (c.to_string(), *v))
        .collect();
    Ok((r.l1_distance, delta))
}

#[pymodule(name = "socsim")]
fn socsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<InteractionLog>()?;
    m.add_class::<SimConfig>()?;
    m.add_class::<Snapshot>()?;
    m.add_function(wrap_pyfunction!(snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(communities, m)?)?;
    m.add_function(wrap_pyfunction!(predict_links, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}
