//! Python bindings for the gpsort library: instance generation, the four
//! solvers with metered query counts, and report aggregation.
//!
//! The module mirrors the CLI's vocabulary — models, algorithms and gap
//! profiles are the same strings `gpsort` accepts on the command line —
//! and keeps all randomness behind explicit integer seeds.

use std::path::PathBuf;

use clap::ValueEnum;
use gpsort::bench::{aggregate as bench_aggregate, run_trials as bench_run_trials, Algorithm, RunReport};
use gpsort::er::SkipBfsConfig;
use gpsort::gpsc::{build_predictor, gpsc_sort_with_predictor, GpscConfig};
use gpsort::instance::{GenParams, Instance, Model};
use gpsort::oracle::OracleSession;
use gpsort::poset::{is_linear_extension, transitive_closure, Dag, LinearExtension, Poset};
use gpsort::solve::{solve_bipartite, solve_er, solve_naive};
use gpsort::weighted::{sort_weighted_doubling_info, WeightedConfig};
use gpsort::Error;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_enum<T: ValueEnum>(what: &str, text: &str) -> PyResult<T> {
    T::from_str(text, true)
        .map_err(|_| PyValueError::new_err(format!("unknown {what} {text:?}")))
}

/// Parse a JSON string into the equivalent Python object.
fn loads(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A partial order over vertices `0..n`, stored as its full closure.
#[pyclass(name = "Poset", frozen)]
pub struct PyPoset {
    inner: Poset,
}

impl PyPoset {
    fn check_vertex(&self, v: u32) -> PyResult<()> {
        if (v as usize) < self.inner.n() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!(
                "vertex {v} out of range for n={}",
                self.inner.n()
            )))
        }
    }
}

#[pymethods]
impl PyPoset {
    /// Build a poset as the transitive closure of the given directed edges.
    #[new]
    fn new(n: usize, edges: Vec<(u32, u32)>) -> PyResult<Self> {
        let dag = Dag::new(n, edges).map_err(py_err)?;
        let inner = transitive_closure(&dag).map_err(py_err)?;
        Ok(PyPoset { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// True when `u` precedes `v`.
    fn less(&self, u: u32, v: u32) -> PyResult<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.inner.less(u, v))
    }

    fn comparable(&self, u: u32, v: u32) -> PyResult<bool> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.inner.comparable(u, v))
    }

    /// Size of the largest antichain.
    fn width(&self) -> usize {
        self.inner.width()
    }

    /// Every vertex strictly below `v`, ascending.
    fn down_set(&self, v: u32) -> PyResult<Vec<u32>> {
        self.check_vertex(v)?;
        Ok(self.inner.down_set(v))
    }

    /// Every vertex strictly above `v`, ascending.
    fn up_set(&self, v: u32) -> PyResult<Vec<u32>> {
        self.check_vertex(v)?;
        Ok(self.inner.up_set(v))
    }

    /// The unique sequence when the poset is a total order, else None.
    fn total_order(&self) -> Option<Vec<u32>> {
        self.inner.total_order_sequence()
    }

    /// A minimum chain decomposition; the number of chains equals the width.
    fn chains(&self) -> Vec<Vec<u32>> {
        self.inner.chain_decomposition().chains().to_vec()
    }

    /// Whether `order` lists all vertices consistently with the poset.
    /// Malformed sequences (wrong length, repeats) raise ValueError.
    fn is_linear_extension(&self, order: Vec<u32>) -> PyResult<bool> {
        is_linear_extension(&LinearExtension::new(order), &self.inner).map_err(py_err)
    }

    /// Hasse diagram edges: the transitive reduction of the closure.
    fn cover_edges(&self) -> Vec<(u32, u32)> {
        self.inner.transitive_reduction().edges().to_vec()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Poset(n={}, width={})", self.inner.n(), self.inner.width())
    }
}

/// A generated benchmark instance: query graph, hidden ground truth, and
/// the parameters that produced it.
#[pyclass(name = "Instance", frozen)]
pub struct PyInstance {
    inner: Instance,
}

#[pymethods]
impl PyInstance {
    /// Generate an instance; `model` is one of "er", "bipartite", "gpsc",
    /// "weighted", with the same knobs as the CLI's `gen` subcommand.
    #[staticmethod]
    #[pyo3(signature = (model, n, seed = 0, k = 3, p = 0.2, w = 2, gap_profile = "uniform-log"))]
    fn generate(
        model: &str,
        n: usize,
        seed: u64,
        k: usize,
        p: f64,
        w: usize,
        gap_profile: &str,
    ) -> PyResult<Self> {
        let model: Model = parse_enum("model", model)?;
        let gp = GenParams {
            n,
            k,
            p,
            w,
            gap_profile: parse_enum("gap profile", gap_profile)?,
        };
        let inner = Instance::generate(model, &gp, seed).map_err(py_err)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = Instance::load(&path).map_err(py_err)?;
        Ok(PyInstance { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(py_err)
    }

    #[getter]
    fn model(&self) -> String {
        self.inner.model.to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.graph.n()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.graph.edge_count()
    }

    #[getter]
    fn is_weighted(&self) -> bool {
        self.inner.graph.is_weighted()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// The hidden poset the instance expects a solver to recover.
    fn ground_truth(&self) -> PyPoset {
        PyPoset {
            inner: self.inner.graph.ground_truth().clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(model={}, n={}, edges={})",
            self.inner.model,
            self.inner.graph.n(),
            self.inner.graph.edge_count()
        )
    }
}

/// Outcome of one metered solver run.
#[pyclass(frozen)]
pub struct SolveResult {
    #[pyo3(get)]
    query_count: usize,
    #[pyo3(get)]
    cost: f64,
    #[pyo3(get)]
    correct: bool,
    order: Option<Vec<u32>>,
    poset: Option<Poset>,
}

#[pymethods]
impl SolveResult {
    /// Recovered total order, when the algorithm produces one.
    #[getter]
    fn order(&self) -> Option<Vec<u32>> {
        self.order.clone()
    }

    /// Recovered poset; None only when a with-high-probability trial missed.
    #[getter]
    fn poset(&self) -> Option<PyPoset> {
        self.poset.clone().map(|inner| PyPoset { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(queries={}, cost={:.1}, correct={})",
            self.query_count, self.cost, self.correct
        )
    }
}

/// Run `algo` once against `instance` under a metered oracle session.
/// `algo` is one of "er", "bipartite", "gpsc", "weighted", "naive".
#[pyfunction]
#[pyo3(signature = (instance, algo, seed = 0))]
pub fn solve(instance: &PyInstance, algo: &str, seed: u64) -> PyResult<SolveResult> {
    let algo: Algorithm = parse_enum("algorithm", algo)?;
    algo.check_model(instance.inner.model).map_err(py_err)?;
    let graph = &instance.inner.graph;
    let truth = graph.ground_truth();
    let mut session = OracleSession::new(graph);

    let correct;
    let mut poset = None;
    match algo {
        Algorithm::Er => {
            let k = instance
                .inner
                .params
                .k
                .ok_or_else(|| PyValueError::new_err("er instance lacks k"))?;
            match solve_er(&mut session, k, &SkipBfsConfig::default(), seed) {
                Ok((got, _)) => {
                    correct = &got == truth;
                    poset = Some(got);
                }
                // A with-high-probability miss is a legitimate outcome.
                Err(Error::InconsistentExtension { .. }) => correct = false,
                Err(e) => return Err(py_err(e)),
            }
        }
        Algorithm::Naive => {
            let got = solve_naive(&mut session, seed).map_err(py_err)?;
            correct = &got == truth;
            poset = Some(got);
        }
        Algorithm::Bipartite => {
            let (got, _) = solve_bipartite(&mut session, seed).map_err(py_err)?;
            correct = &got == truth;
            poset = Some(got);
        }
        Algorithm::Gpsc => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = GpscConfig::default();
            let mut view = session.view();
            let predictor = build_predictor(&mut view, &cfg, &mut rng).map_err(py_err)?;
            let (got, _) =
                gpsc_sort_with_predictor(&mut view, &predictor, &mut rng).map_err(py_err)?;
            correct = &got == truth;
            poset = Some(got);
        }
        Algorithm::Weighted => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (le, _) =
                sort_weighted_doubling_info(&mut session, &WeightedConfig::default(), &mut rng)
                    .map_err(py_err)?;
            correct = truth
                .total_order_sequence()
                .is_some_and(|seq| seq == le.order());
            let chain = le.order().windows(2).map(|w| (w[0], w[1]));
            let dag = Dag::new(graph.n(), chain).map_err(py_err)?;
            poset = Some(transitive_closure(&dag).map_err(py_err)?);
        }
    }

    let report = session.report();
    let order = poset.as_ref().and_then(|p| p.total_order_sequence());
    Ok(SolveResult {
        query_count: report.query_count,
        cost: report.cost,
        correct,
        order,
        poset,
    })
}

/// Run seeded trials exactly like the CLI's `run` subcommand and return
/// one dict per trial, with the same fields as `reports.jsonl`.
#[pyfunction]
#[pyo3(signature = (instance, algo, trials = 20, seed = 0))]
pub fn run_trials(
    py: Python<'_>,
    instance: &PyInstance,
    algo: &str,
    trials: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let algo: Algorithm = parse_enum("algorithm", algo)?;
    let reports = bench_run_trials(&instance.inner, algo, trials, seed).map_err(py_err)?;
    let text = serde_json::to_string(&reports)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    loads(py, &text)
}

/// Aggregate report dicts (as produced by `run_trials`) into per-size
/// medians and per-family log-log slopes, like the CLI's `report`.
#[pyfunction]
pub fn aggregate(py: Python<'_>, reports: Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let text: String = py
        .import("json")?
        .call_method1("dumps", (reports,))?
        .extract()?;
    let reports: Vec<RunReport> =
        serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let tables = bench_aggregate(&reports).map_err(py_err)?;
    let value = json!({
        "medians": tables.medians.iter().map(|m| json!({
            "family": m.family,
            "n": m.n,
            "trials": m.trials,
            "correct_frac": m.correct_frac,
            "query_median": m.query_median,
            "cost_median": m.cost_median,
            "norm_nk2ln3": m.norm_nk2ln3,
            "norm_nkln": m.norm_nkln,
            "ratio_median": m.ratio_median,
        })).collect::<Vec<_>>(),
        "slopes": tables.slopes.iter().map(|s| json!({
            "family": s.family,
            "points": s.points,
            "slope": s.slope,
        })).collect::<Vec<_>>(),
    });
    loads(py, &value.to_string())
}

#[pymodule]
pub fn gpsort_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoset>()?;
    m.add_class::<PyInstance>()?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    Ok(())
}
