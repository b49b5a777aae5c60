//! Python bindings: formulas, the solver pipeline, the exhaustive oracle,
//! and the random instance generator, exposed as the `partsat_py` module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use partsat::extract::{SolveOutcome, VertexOrder};
use partsat::formula::{parse_dimacs, reduce_to_3sat, verify_assignment, Assignment, CnfFormula};
use partsat::oracle::{enumerate_models, gen_random_3sat, GeneratorConfig};
use partsat::propagate::OrderMode;
use partsat::solver::{prepare, solve_formula, SolveConfig};

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// A CNF formula over integer variables starting at 1.
#[pyclass(name = "Formula", from_py_object)]
#[derive(Clone)]
struct PyFormula {
    inner: CnfFormula,
}

#[pymethods]
impl PyFormula {
    /// Parse DIMACS CNF text.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyFormula {
            inner: parse_dimacs(text).map_err(value_error)?,
        })
    }

    #[getter]
    fn num_vars(&self) -> u32 {
        self.inner.num_vars()
    }

    #[getter]
    fn num_clauses(&self) -> usize {
        self.inner.clauses().len()
    }

    #[getter]
    fn tautologies_dropped(&self) -> usize {
        self.inner.stats().tautologies_dropped
    }

    fn to_dimacs(&self) -> String {
        self.inner.to_dimacs()
    }

    /// Equisatisfiable 3SAT form; auxiliary ids sit above the originals.
    fn reduce_to_3sat(&self) -> PyFormula {
        PyFormula {
            inner: reduce_to_3sat(&self.inner),
        }
    }

    /// One line per partition element: `(v1,v2,v3) C=0x.. R=0x.. S=0x..`.
    fn dump_elements(&self) -> PyResult<String> {
        let (_, partition, _) = prepare(&self.inner).map_err(value_error)?;
        Ok(partition.dump())
    }

    /// True iff the assignment (one bool per variable) satisfies every
    /// clause.
    fn verify(&self, values: Vec<bool>) -> PyResult<bool> {
        verify_assignment(&self.inner, &Assignment::new(values)).map_err(value_error)
    }

    /// Exact model count by exhaustive enumeration (refused above 25
    /// variables).
    fn count_models(&self) -> PyResult<usize> {
        Ok(enumerate_models(&self.inner).map_err(value_error)?.count())
    }

    fn __repr__(&self) -> String {
        format!(
            "Formula(num_vars={}, num_clauses={})",
            self.inner.num_vars(),
            self.inner.clauses().len()
        )
    }
}

/// Outcome of one solve: `outcome` is `SAT-VERIFIED`, `UNSAT`, or
/// `UNKNOWN`; a verified witness is a list of signed DIMACS literals.
#[pyclass(name = "SolveResult")]
struct PySolveResult {
    outcome: String,
    unknown_reason: Option<String>,
    witness: Option<Vec<i64>>,
    report_json: String,
}

#[pymethods]
impl PySolveResult {
    #[getter]
    fn outcome(&self) -> &str {
        &self.outcome
    }

    #[getter]
    fn unknown_reason(&self) -> Option<&str> {
        self.unknown_reason.as_deref()
    }

    #[getter]
    fn witness(&self) -> Option<Vec<i64>> {
        self.witness.clone()
    }

    /// Full run report (counters, bounds, status) as a JSON string.
    fn report_json(&self) -> &str {
        &self.report_json
    }

    fn __repr__(&self) -> String {
        format!("SolveResult(outcome={:?})", self.outcome)
    }
}

/// Run propagation and, when `extract` is set, the verified witness search.
#[pyfunction]
#[pyo3(signature = (formula, extract = true, order = "worklist", seed = 0, vertex_order = "key", max_backtracks = 10_000))]
fn solve(
    formula: &PyFormula,
    extract: bool,
    order: &str,
    seed: u64,
    vertex_order: &str,
    max_backtracks: u64,
) -> PyResult<PySolveResult> {
    let order = match order {
        "worklist" => OrderMode::WorklistFifo,
        "sweep" => OrderMode::Sweep,
        "shuffle" => OrderMode::ShuffledSweep(seed),
        other => return Err(value_error(format!("unknown order `{other}`"))),
    };
    let vertex_order = match vertex_order {
        "key" => VertexOrder::AscendingKey,
        "most-constrained" => VertexOrder::MostConstrainedFirst,
        other => return Err(value_error(format!("unknown vertex order `{other}`"))),
    };
    let config = SolveConfig {
        order,
        vertex_order,
        extract,
        max_backtracks,
    };
    let run = solve_formula(&formula.inner, &config).map_err(value_error)?;
    let witness = match &run.outcome {
        SolveOutcome::SatVerified(assignment) => Some(assignment.to_dimacs_literals()),
        _ => None,
    };
    Ok(PySolveResult {
        outcome: run.report.outcome.clone(),
        unknown_reason: run.report.unknown_reason.clone(),
        witness,
        report_json: serde_json::to_string(&run.report).map_err(value_error)?,
    })
}

/// Deterministic uniform random 3SAT instance.
#[pyfunction]
#[pyo3(name = "gen_random_3sat")]
fn gen_random_3sat_py(seed: u64, num_vars: u32, num_clauses: usize) -> PyResult<PyFormula> {
    Ok(PyFormula {
        inner: gen_random_3sat(&GeneratorConfig::new(seed, num_vars, num_clauses))
            .map_err(value_error)?,
    })
}

#[pymodule]
fn partsat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyFormula>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random_3sat_py, m)?)?;
    Ok(())
}
