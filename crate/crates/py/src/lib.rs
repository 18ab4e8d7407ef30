//! Python bindings for the rwsparse library: weighted graphs, effective
//! resistances, the ideal/chain sparsifiers, the random-walk sparsifier,
//! and the dense verification oracle.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rwsparse::graph::{Edge, Graph as CoreGraph};
use rwsparse::oracle::{kappa_target, sparsifier_kappa, spectral_similarity as core_similarity};
use rwsparse::resistance::{jl_resistance_bounds, leverage_scores, ResistanceBounds};
use rwsparse::sparsify::{chain_sparsify, ideal_sample, SamplerConfig, SparsifyReport};
use rwsparse::tree::build_forest;
use rwsparse::walk::{sparsify_gk, ResistanceEstimator, WalkReport};
use rwsparse::{gen, io, Error, DEFAULT_ORACLE_CAP};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::InvalidGraph(_) | Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn check_cap(n: usize, cap: usize, what: &str) -> PyResult<()> {
    if n > cap {
        return Err(PyRuntimeError::new_err(format!(
            "{} needs dense O(n^3) work at n = {}, cap is {} (raise oracle_cap to override)",
            what, n, cap
        )));
    }
    Ok(())
}

/// A weighted undirected multigraph with a fixed vertex set 0..n.
#[pyclass(name = "Graph", module = "rwsparse_py")]
#[derive(Clone)]
struct PyGraph {
    inner: CoreGraph,
}

#[pymethods]
impl PyGraph {
    /// Graph(n, edges) with edges given as (u, v, w) triples.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let edges = edges
            .into_iter()
            .map(|(u, v, w)| Edge::new(u, v, w))
            .collect();
        Ok(PyGraph {
            inner: CoreGraph::new(n, edges).map_err(to_py_err)?,
        })
    }

    /// Reads a graph from the text format used by the CLI.
    #[staticmethod]
    fn read(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyGraph {
            inner: io::read_graph_path(&path).map_err(to_py_err)?,
        })
    }

    /// Writes the graph in the text format used by the CLI.
    fn write(&self, path: std::path::PathBuf) -> PyResult<()> {
        io::write_graph_path(&self.inner, &path).map_err(to_py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().iter().map(|e| (e.u, e.v, e.w)).collect()
    }

    fn degree(&self, v: usize) -> PyResult<f64> {
        if v >= self.inner.n() {
            return Err(PyValueError::new_err("vertex out of range"));
        }
        Ok(self.inner.degree(v))
    }

    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Dense Laplacian as a row-major list of rows.
    fn laplacian(&self) -> Vec<Vec<f64>> {
        let l = self.inner.laplacian();
        (0..l.nrows())
            .map(|i| (0..l.ncols()).map(|j| l[(i, j)]).collect())
            .collect()
    }

    /// The k-step walk graph G^k, built densely (oracle; O(n^3) work).
    #[pyo3(signature = (k, oracle_cap = DEFAULT_ORACLE_CAP))]
    fn walk_graph(&self, k: usize, oracle_cap: usize) -> PyResult<Self> {
        check_cap(self.inner.n(), oracle_cap, "dense walk graph")?;
        Ok(PyGraph {
            inner: self.inner.walk_graph_dense(k).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

fn sparsify_dict<'py>(py: Python<'py>, r: &SparsifyReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("m_in", r.m_in)?;
    d.set_item("m_out", r.m_out)?;
    d.set_item("N", r.sample_count)?;
    d.set_item("sum_tau", r.sum_tau)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("seed", r.seed)?;
    d.set_item("kappa_measured", r.kappa_measured)?;
    d.set_item("elapsed_ms", r.elapsed_ms)?;
    Ok(d)
}

fn walk_dict<'py>(py: Python<'py>, r: &WalkReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("k", r.k)?;
    d.set_item("parity", &r.parity)?;
    d.set_item("estimator", &r.estimator)?;
    d.set_item("m_in", r.m_in)?;
    d.set_item("m_out", r.m_out)?;
    d.set_item("N", r.walks_sampled)?;
    d.set_item("self_loops_dropped", r.self_loops_dropped)?;
    d.set_item("self_loop_fraction", r.self_loop_fraction)?;
    d.set_item("sum_tau", r.sum_tau)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("seed", r.seed)?;
    d.set_item("elapsed_ms", r.elapsed_ms)?;
    Ok(d)
}

fn parse_estimator(s: &str) -> PyResult<ResistanceEstimator> {
    s.parse()
        .map_err(|_| PyValueError::new_err("estimator must be one of: exact, jl, tree"))
}

/// Sparsify a graph directly. mode "exact" uses exact leverage scores
/// (dense oracle work), mode "chain" uses the density-independent
/// low-stretch-tree chain.
#[pyfunction]
#[pyo3(signature = (g, epsilon = 0.5, mode = "exact", seed = 0, oracle_cap = DEFAULT_ORACLE_CAP))]
fn sparsify<'py>(
    py: Python<'py>,
    g: &PyGraph,
    epsilon: f64,
    mode: &str,
    seed: u64,
    oracle_cap: usize,
) -> PyResult<(PyGraph, Bound<'py, PyDict>)> {
    let cfg = SamplerConfig::new(epsilon, seed);
    cfg.validate().map_err(to_py_err)?;
    let (h, report) = match mode {
        "exact" => {
            check_cap(g.inner.n(), oracle_cap, "exact leverage scores")?;
            let bounds = leverage_scores(&g.inner);
            ideal_sample(&g.inner, &bounds, &cfg).map_err(to_py_err)?
        }
        "chain" => {
            let (h, _, report) = chain_sparsify(&g.inner, &cfg).map_err(to_py_err)?;
            (h, report)
        }
        _ => return Err(PyValueError::new_err("mode must be 'exact' or 'chain'")),
    };
    Ok((PyGraph { inner: h }, sparsify_dict(py, &report)?))
}

/// Sparsify the k-step walk graph G^k by walk sampling, never forming G^k.
#[pyfunction]
#[pyo3(signature = (g, k, epsilon = 0.5, estimator = "exact", seed = 0, oracle_cap = DEFAULT_ORACLE_CAP))]
fn walk_sparsify<'py>(
    py: Python<'py>,
    g: &PyGraph,
    k: usize,
    epsilon: f64,
    estimator: &str,
    seed: u64,
    oracle_cap: usize,
) -> PyResult<(PyGraph, Bound<'py, PyDict>)> {
    let est = parse_estimator(estimator)?;
    if matches!(est, ResistanceEstimator::Exact) {
        check_cap(g.inner.n(), oracle_cap, "exact resistance estimator")?;
    }
    let cfg = SamplerConfig::new(epsilon, seed);
    let (h, report) = sparsify_gk(&g.inner, k, &cfg, est).map_err(to_py_err)?;
    Ok((PyGraph { inner: h }, walk_dict(py, &report)?))
}

/// Per-edge effective-resistance upper bounds and the implied leverage
/// bounds, as (resistances, taus) lists aligned with g.edges().
#[pyfunction]
#[pyo3(signature = (g, estimator = "exact", delta = 0.5, seed = 0, oracle_cap = DEFAULT_ORACLE_CAP))]
fn effective_resistances(
    g: &PyGraph,
    estimator: &str,
    delta: f64,
    seed: u64,
    oracle_cap: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let bounds: ResistanceBounds = match parse_estimator(estimator)? {
        ResistanceEstimator::Exact => {
            check_cap(g.inner.n(), oracle_cap, "exact resistances")?;
            leverage_scores(&g.inner)
        }
        ResistanceEstimator::Jl => {
            jl_resistance_bounds(&g.inner, delta, seed).map_err(to_py_err)?
        }
        ResistanceEstimator::Tree => {
            let forest = build_forest(&g.inner, seed, 8);
            let r: Vec<f64> = g
                .inner
                .edges()
                .iter()
                .map(|e| {
                    if e.is_loop() {
                        0.0
                    } else {
                        forest.path_resistance(e.u, e.v)
                    }
                })
                .collect();
            ResistanceBounds::new(&g.inner, r).map_err(to_py_err)?
        }
    };
    Ok((bounds.resistances().to_vec(), bounds.taus().to_vec()))
}

/// Dense verification oracle: checks whether h is an eps-sparsifier of g
/// (or of g's k-step walk graph when k is given). Returns a dict with
/// kappa, kappa_target and verified.
#[pyfunction]
#[pyo3(signature = (g, h, epsilon, k = None, oracle_cap = DEFAULT_ORACLE_CAP))]
fn verify<'py>(
    py: Python<'py>,
    g: &PyGraph,
    h: &PyGraph,
    epsilon: f64,
    k: Option<usize>,
    oracle_cap: usize,
) -> PyResult<Bound<'py, PyDict>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PyValueError::new_err("epsilon must be in (0, 1)"));
    }
    check_cap(g.inner.n().max(h.inner.n()), oracle_cap, "verification oracle")?;
    let reference = match k {
        Some(k) => g.inner.walk_graph_dense(k).map_err(to_py_err)?,
        None => g.inner.clone(),
    };
    let kappa = sparsifier_kappa(&reference, &h.inner).map_err(to_py_err)?;
    let target = kappa_target(epsilon);
    let d = PyDict::new(py);
    d.set_item("n", reference.n())?;
    d.set_item("k", k)?;
    d.set_item("epsilon", epsilon)?;
    d.set_item("kappa", kappa)?;
    d.set_item("kappa_target", target)?;
    d.set_item("verified", kappa <= target)?;
    Ok(d)
}

/// Generalized eigenvalue range of h against g, as
/// (lambda_min, lambda_max, kappa = lambda_max / lambda_min).
#[pyfunction]
#[pyo3(signature = (g, h, oracle_cap = DEFAULT_ORACLE_CAP))]
fn spectral_similarity(
    g: &PyGraph,
    h: &PyGraph,
    oracle_cap: usize,
) -> PyResult<(f64, f64, f64)> {
    check_cap(g.inner.n().max(h.inner.n()), oracle_cap, "similarity oracle")?;
    let cert = core_similarity(&g.inner, &h.inner).map_err(to_py_err)?;
    Ok((cert.lambda_min, cert.lambda_max, cert.kappa))
}

// Generators.

#[pyfunction]
#[pyo3(signature = (n, weight = 1.0))]
fn path(n: usize, weight: f64) -> PyGraph {
    PyGraph { inner: gen::path(n, weight) }
}

#[pyfunction]
#[pyo3(signature = (n, weight = 1.0))]
fn cycle(n: usize, weight: f64) -> PyGraph {
    PyGraph { inner: gen::cycle(n, weight) }
}

#[pyfunction]
#[pyo3(signature = (n, weight = 1.0))]
fn star(n: usize, weight: f64) -> PyGraph {
    PyGraph { inner: gen::star(n, weight) }
}

#[pyfunction]
#[pyo3(signature = (n, weight = 1.0))]
fn complete(n: usize, weight: f64) -> PyGraph {
    PyGraph { inner: gen::complete(n, weight) }
}

#[pyfunction]
#[pyo3(signature = (n, p, seed = 0))]
fn gnp(n: usize, p: f64, seed: u64) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: gen::gnp(n, p, seed).map_err(to_py_err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (n, p, seed = 0))]
fn gnp_connected(n: usize, p: f64, seed: u64) -> PyGraph {
    PyGraph { inner: gen::gnp_connected(n, p, seed) }
}

#[pymodule]
fn rwsparse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(sparsify, m)?)?;
    m.add_function(wrap_pyfunction!(walk_sparsify, m)?)?;
    m.add_function(wrap_pyfunction!(effective_resistances, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(path, m)?)?;
    m.add_function(wrap_pyfunction!(cycle, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(complete, m)?)?;
    m.add_function(wrap_pyfunction!(gnp, m)?)?;
    m.add_function(wrap_pyfunction!(gnp_connected, m)?)?;
    m.add("DEFAULT_ORACLE_CAP", DEFAULT_ORACLE_CAP)?;
    Ok(())
}
