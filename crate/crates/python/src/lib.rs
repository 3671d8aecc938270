#![cfg(feature = "extension-module")]
//! Python bindings over the solver crate: build or load transition
//! matrices, run the iteration schemes, and query the dense oracles.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use blockpower::chains::{
    generate, spectrum_oracle_reversible, stationary_oracle_dense, ChainSpec,
};
use blockpower::io::{load_matrix_market, write_matrix_market};
use blockpower::{DenseBlock, Error, Extraction, SolverConfig, Status};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        Error::Parse { .. }
        | Error::Stochasticity { .. }
        | Error::DuplicateEntry { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidParameters { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Row-stochastic transition matrix, stored transposed in CSR.
#[pyclass(frozen)]
struct TransitionMatrix {
    inner: blockpower::SparseTransitionMatrix,
}

#[pymethods]
impl TransitionMatrix {
    /// TransitionMatrix(n, triplets) from (row, col, probability) entries of P.
    #[new]
    fn new(n: usize, triplets: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let inner =
            blockpower::SparseTransitionMatrix::from_triplets(n, &triplets).map_err(to_py_err)?;
        Ok(TransitionMatrix { inner })
    }

    /// Loads a MatrixMarket coordinate file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(TransitionMatrix { inner: load_matrix_market(path).map_err(to_py_err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        write_matrix_market(path, &self.inner).map_err(to_py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    /// Entries of P as (row, col, probability), sorted by row then col.
    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner.triplets()
    }

    /// One application of P^T to a vector.
    fn apply_transpose(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let block = DenseBlock::from_columns(&[&x]).map_err(to_py_err)?;
        let out = self.inner.apply_transpose(&block).map_err(to_py_err)?;
        Ok(out.column(0).to_vec())
    }

    fn __repr__(&self) -> String {
        format!("TransitionMatrix(n={}, nnz={})", self.inner.n(), self.inner.nnz())
    }
}

/// Outcome of a solve run.
#[pyclass(frozen, get_all)]
struct Report {
    distribution: Vec<f64>,
    /// (iteration, matvecs, residual, effective_rank) per checkpoint.
    history: Vec<(usize, usize, f64, usize)>,
    total_iterations: usize,
    total_matvecs: usize,
    status: String,
    converged: bool,
    warnings: Vec<String>,
}

#[pymethods]
impl Report {
    fn __repr__(&self) -> String {
        format!(
            "Report(status={}, iterations={}, matvecs={})",
            self.status, self.total_iterations, self.total_matvecs
        )
    }
}

/// Runs the (block/windowed) power iteration to a stopping decision.
#[pyfunction]
#[pyo3(signature = (
    matrix,
    block_size = 1,
    window = 1,
    tol = 1e-10,
    check_every = 100,
    max_iters = 1_000_000,
    seed = 0,
    reorthonormalize = true,
    extraction = "min-residual",
    drop_tol = 1e-10,
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    matrix: &TransitionMatrix,
    block_size: usize,
    window: usize,
    tol: f64,
    check_every: usize,
    max_iters: usize,
    seed: u64,
    reorthonormalize: bool,
    extraction: &str,
    drop_tol: f64,
) -> PyResult<Report> {
    let extraction = match extraction {
        "min-residual" => Extraction::MinResidual,
        "dominant-ritz" => Extraction::DominantRitz,
        other => {
            return Err(PyValueError::new_err(format!(
                "extraction must be 'min-residual' or 'dominant-ritz', got '{other}'"
            )))
        }
    };
    let cfg = SolverConfig {
        block_size,
        window,
        tol,
        check_interval: check_every,
        max_iterations: max_iters,
        seed,
        reorthonormalize,
        extraction,
        drop_tol,
    };
    let report = blockpower::solve(&matrix.inner, &cfg).map_err(to_py_err)?;
    Ok(Report {
        distribution: report.distribution,
        history: report
            .residual_history
            .iter()
            .map(|r| (r.iteration, r.matvecs, r.residual, r.effective_rank))
            .collect(),
        total_iterations: report.total_iterations,
        total_matvecs: report.total_matvecs,
        status: match report.status {
            Status::Converged => "Converged".into(),
            Status::MaxIterations => "MaxIterations".into(),
            Status::NumericalBreakdown => "NumericalBreakdown".into(),
        },
        converged: report.status == Status::Converged,
        warnings: report.warnings,
    })
}

/// The 5-state example chain.
#[pyfunction]
fn fig1() -> PyResult<TransitionMatrix> {
    Ok(TransitionMatrix { inner: generate(&ChainSpec::Fig1).map_err(to_py_err)? })
}

/// Birth-death chain on {0..n-1} with up/down probabilities p and q.
#[pyfunction]
fn birth_death(n: usize, p: f64, q: f64) -> PyResult<TransitionMatrix> {
    Ok(TransitionMatrix { inner: generate(&ChainSpec::BirthDeath { n, p, q }).map_err(to_py_err)? })
}

/// Seeded reversible chain from a symmetric weighted graph.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn random_reversible(n: usize, seed: u64) -> PyResult<TransitionMatrix> {
    Ok(TransitionMatrix {
        inner: generate(&ChainSpec::RandomReversible { n, seed }).map_err(to_py_err)?,
    })
}

/// m rapid-mixing clusters with coupling eps: m eigenvalues near 1.
#[pyfunction]
#[pyo3(signature = (m, cluster_size, eps, seed = 0))]
fn clustered(m: usize, cluster_size: usize, eps: f64, seed: u64) -> PyResult<TransitionMatrix> {
    Ok(TransitionMatrix {
        inner: generate(&ChainSpec::Clustered { m, cluster_size, eps, seed })
            .map_err(to_py_err)?,
    })
}

/// Dense brute-force stationary distribution (n <= 2000).
#[pyfunction]
fn stationary_oracle(matrix: &TransitionMatrix) -> PyResult<Vec<f64>> {
    stationary_oracle_dense(&matrix.inner).map_err(to_py_err)
}

/// Eigenvalue magnitudes (descending) of a reversible chain.
#[pyfunction]
#[pyo3(signature = (matrix, pi = None))]
fn spectrum(matrix: &TransitionMatrix, pi: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    let pi = match pi {
        Some(p) => p,
        None => stationary_oracle_dense(&matrix.inner).map_err(to_py_err)?,
    };
    spectrum_oracle_reversible(&matrix.inner, &pi).map_err(to_py_err)
}

#[pymodule]
fn blockpower_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TransitionMatrix>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(fig1, m)?)?;
    m.add_function(wrap_pyfunction!(birth_death, m)?)?;
    m.add_function(wrap_pyfunction!(random_reversible, m)?)?;
    m.add_function(wrap_pyfunction!(clustered, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    Ok(())
}
