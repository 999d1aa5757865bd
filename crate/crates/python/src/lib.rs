//! Python bindings for walkernel.
//!
//! Graphs, kernels, Gram matrices, generators, transducers and the
//! property suites. Errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use walkernel::graph::io::{parse_graph, to_edge_list, to_json};
use walkernel::graph::{random_graph_set1, random_graph_set2, Graph, RngSeed};
use walkernel::kernels::{
    diffusion_vertex_kernel, geometric_kernel, gram_matrix, psd_check, random_walk_kernel, GraphKernel, KernelConfig,
    Method, PowerMode,
};
use walkernel::semiring::{check_axioms, Semiring};
use walkernel::transducer::{parse_transducer, write_transducer, WeightedTransducer};
use walkernel::verify::{run_suite, SUITES};

fn err(e: walkernel::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(lambda: f64, method: &str, tol: f64, measure: &str) -> PyResult<KernelConfig> {
    let method: Method = method.parse().map_err(err)?;
    let cfg = KernelConfig { lambda, tol, method, measure: measure.parse().map_err(err)?, ..KernelConfig::default() };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// An immutable graph.
#[pyclass(name = "Graph", module = "walkernel_py", frozen)]
#[derive(Clone)]
pub struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    /// Undirected graph from `(i, j)` pairs, or `(i, j, label)` triples when
    /// `num_labels` is given.
    #[new]
    #[pyo3(signature = (n, edges, num_labels=None))]
    fn new(n: usize, edges: Vec<Vec<usize>>, num_labels: Option<usize>) -> PyResult<Self> {
        let g = match num_labels {
            None => {
                let pairs = edges
                    .iter()
                    .map(|e| match e.as_slice() {
                        [i, j] => Ok((*i, *j)),
                        _ => Err(PyValueError::new_err("edges must be (i, j) pairs")),
                    })
                    .collect::<PyResult<Vec<_>>>()?;
                Graph::undirected(n, &pairs)
            }
            Some(d) => {
                let triples = edges
                    .iter()
                    .map(|e| match e.as_slice() {
                        [i, j, l] => Ok((*i, *j, *l)),
                        _ => Err(PyValueError::new_err("labeled edges must be (i, j, label) triples")),
                    })
                    .collect::<PyResult<Vec<_>>>()?;
                Graph::undirected_labeled(n, d, &triples)
            }
        };
        Ok(Self { inner: g.map_err(err)? })
    }

    /// Parses the JSON or edge-list format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_graph(text).map_err(err)? })
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        Self { inner: Graph::complete(n) }
    }

    #[staticmethod]
    #[pyo3(signature = (k, seed=0))]
    fn set1(k: u32, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: random_graph_set1(k, RngSeed(seed)).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (n, fill, seed=0))]
    fn set2(n: usize, fill: f64, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: random_graph_set2(n, fill, RngSeed(seed)).map_err(err)? })
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.is_directed()
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().iter().map(|e| (e.source, e.target, e.weight)).collect()
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    fn to_edge_list(&self) -> PyResult<String> {
        to_edge_list(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={})", self.inner.num_vertices(), self.inner.num_edges())
    }
}

#[pyfunction]
#[pyo3(signature = (g, h, lambda_=0.001, method="fixed_point", tol=1e-6, measure="geometric"))]
fn random_walk(g: &PyGraph, h: &PyGraph, lambda_: f64, method: &str, tol: f64, measure: &str) -> PyResult<f64> {
    let cfg = config(lambda_, method, tol, measure)?;
    Ok(random_walk_kernel(&g.inner, &h.inner, &cfg).map_err(err)?.value)
}

#[pyfunction]
#[pyo3(signature = (g, h, lambda_=1.0))]
fn geometric(g: &PyGraph, h: &PyGraph, lambda_: f64) -> PyResult<f64> {
    geometric_kernel(&g.inner, &h.inner, lambda_).map_err(err)
}

/// Heat kernel `exp(−tL)` of one graph as a list of rows.
#[pyfunction]
fn diffusion(g: &PyGraph, t: f64) -> PyResult<Vec<Vec<f64>>> {
    let k = diffusion_vertex_kernel(&g.inner, t).map_err(err)?;
    Ok((0..k.rows()).map(|i| k.row(i).to_vec()).collect())
}

/// Gram matrix and PSD report `(rows, min_eigenvalue, is_psd)`.
#[pyfunction]
#[pyo3(signature = (graphs, kernel="random-walk", lambda_=0.001, method="fixed_point", tol=1e-6, measure="geometric", power_mode="even"))]
fn gram(
    py: Python<'_>,
    graphs: Vec<PyGraph>,
    kernel: &str,
    lambda_: f64,
    method: &str,
    tol: f64,
    measure: &str,
    power_mode: &str,
) -> PyResult<(Vec<Vec<f64>>, f64, bool)> {
    let cfg = config(lambda_, method, tol, measure)?;
    let mode: PowerMode = power_mode.parse().map_err(err)?;
    let kernel = GraphKernel::parse(kernel, mode).map_err(err)?;
    let gs: Vec<Graph> = graphs.into_iter().map(|g| g.inner).collect();
    let (gm, rep) = py.allow_threads(|| {
        let gm = gram_matrix(&gs, |a, b| kernel.evaluate(a, b, &cfg), true)?;
        let rep = psd_check(&gm)?;
        Ok::<_, walkernel::Error>((gm, rep))
    })
    .map_err(err)?;
    let rows = (0..gm.size()).map(|i| gm.values.row(i).to_vec()).collect();
    Ok((rows, rep.min_eigenvalue, rep.is_psd))
}

/// A weighted transducer in the text format.
#[pyclass(name = "Transducer", module = "walkernel_py", frozen)]
pub struct PyTransducer {
    inner: WeightedTransducer,
}

#[pymethods]
impl PyTransducer {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_transducer(text).map_err(err)? })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn semiring(&self) -> &'static str {
        self.inner.semiring().name()
    }

    fn weight(&self, alpha: Vec<usize>, beta: Vec<usize>) -> PyResult<f64> {
        self.inner.output_weight(&alpha, &beta).map_err(err)
    }

    fn compose(&self, other: &PyTransducer) -> PyResult<Self> {
        Ok(Self { inner: self.inner.compose(&other.inner).map_err(err)? })
    }

    fn inverse(&self) -> Self {
        Self { inner: self.inner.inverse() }
    }

    fn to_text(&self) -> String {
        write_transducer(&self.inner)
    }
}

/// Number of failed law checks for a semiring over random samples.
#[pyfunction]
#[pyo3(signature = (name, samples=1000, seed=0))]
fn semiring_law_failures(name: &str, samples: usize, seed: u64) -> PyResult<usize> {
    let s: Semiring = name.parse().map_err(err)?;
    Ok(check_axioms(s, samples, RngSeed(seed)).failures.len())
}

/// Runs a property suite; returns `(passed, cases, failures)`.
#[pyfunction]
#[pyo3(signature = (name, seed=1))]
fn verify(py: Python<'_>, name: &str, seed: u64) -> PyResult<(bool, usize, Vec<String>)> {
    let r = py.allow_threads(|| run_suite(name, RngSeed(seed))).map_err(err)?;
    Ok((r.passed(), r.cases, r.failures))
}

#[pymodule]
pub fn walkernel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyTransducer>()?;
    m.add_function(wrap_pyfunction!(random_walk, m)?)?;
    m.add_function(wrap_pyfunction!(geometric, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(semiring_law_failures, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("SUITES", SUITES.to_vec())?;
    m.add("METHODS", Method::ALL.iter().map(|x| x.name()).collect::<Vec<_>>())?;
    Ok(())
}
