//! Python bindings for the `fracobs` crate.
//!
//! Grid functions cross the boundary as plain lists holding every node,
//! boundary nodes included.

use std::collections::BTreeMap;

use fracobs::harness::to_json_string;
use fracobs::{Error, FractionalParams, GridFunction};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait PyResultExt<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> PyResultExt<T> for fracobs::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

type ThetaMask = (Vec<f64>, Vec<bool>);
type BbmRow = (f64, f64, f64, f64);
type Intervals = Vec<(f64, f64)>;

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

#[pyclass(name = "Grid", module = "fracobs_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyGrid {
    inner: fracobs::Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (a = -1.0, b = 1.0, n_cells = 1024))]
    fn new(a: f64, b: f64, n_cells: usize) -> PyResult<Self> {
        Ok(PyGrid {
            inner: fracobs::build_grid(a, b, n_cells).py_err()?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(a={}, b={}, n_cells={})",
            self.inner.a(),
            self.inner.b(),
            self.inner.n_cells()
        )
    }
}

impl PyGrid {
    fn function(&self, values: Vec<f64>) -> PyResult<GridFunction> {
        GridFunction::from_values(self.inner, values).py_err()
    }
}

#[pyclass(name = "Operator", module = "fracobs_py", frozen)]
pub struct PyOperator {
    inner: fracobs::DiscreteOperator,
    grid: PyGrid,
}

#[pymethods]
impl PyOperator {
    /// `s = 1` gives the local p-Laplacian.
    #[new]
    fn new(grid: PyGrid, s: f64, p: f64) -> PyResult<Self> {
        let params = FractionalParams::new(s, p).py_err()?;
        Ok(PyOperator {
            inner: fracobs::DiscreteOperator::new(grid.inner, params).py_err()?,
            grid,
        })
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.params().s
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        self.grid.clone()
    }

    fn apply(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        let u = self.grid.function(u)?;
        Ok(self.inner.apply(&u).py_err()?.into_values())
    }

    fn energy(&self, u: Vec<f64>) -> PyResult<f64> {
        let u = self.grid.function(u)?;
        self.inner.energy(&u).py_err()
    }

    fn __repr__(&self) -> String {
        format!(
            "Operator(s={}, p={}, n_cells={})",
            self.s(),
            self.p(),
            self.grid.inner.n_cells()
        )
    }
}

#[pyclass(name = "Problem", module = "fracobs_py", frozen)]
pub struct PyProblem {
    inner: fracobs::ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn catalog(id: &str, grid: PyGrid) -> PyResult<Self> {
        Ok(PyProblem {
            inner: fracobs::catalog_problem(id, grid.inner).py_err()?,
        })
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id.clone()
    }

    #[getter]
    fn f(&self) -> Vec<f64> {
        self.inner.f.values().to_vec()
    }

    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.inner.psi.values().to_vec()
    }
}

#[pyclass(name = "SolveResult", module = "fracobs_py", frozen)]
pub struct PySolveResult {
    inner: fracobs::SolveReport,
}

#[pymethods]
impl PySolveResult {
    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.u.values().to_vec()
    }

    #[getter]
    fn operator_values(&self) -> Vec<f64> {
        self.inner.operator_values.values().to_vec()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn sweeps(&self) -> usize {
        self.inner.sweeps
    }

    #[getter]
    fn newton_steps(&self) -> usize {
        self.inner.newton_steps
    }

    #[getter]
    fn tol_u(&self) -> f64 {
        self.inner.tol_u
    }

    #[getter]
    fn eps(&self) -> Option<f64> {
        self.inner.eps
    }

    #[getter]
    fn coincidence_intervals(&self) -> Vec<(f64, f64)> {
        self.inner.coincidence_intervals.clone()
    }

    #[getter]
    fn free_boundary(&self) -> Vec<f64> {
        self.inner.free_boundary.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(problem={}, converged={}, residual={:.3e})",
            self.inner.problem_id, self.inner.converged, self.inner.residual
        )
    }
}

fn solver_options(tol: f64, max_sweeps: usize, method: &str, tol_u: Option<f64>) -> PyResult<fracobs::SolverOptions> {
    Ok(fracobs::SolverOptions {
        max_sweeps,
        method: parse(method)?,
        tol_u,
        ..fracobs::SolverOptions::with_tol(tol)
    })
}

#[pyfunction]
#[pyo3(signature = (op, problem, tol = 1e-8, max_sweeps = 100_000, method = "newton", tol_u = None))]
fn solve_vi(
    py: Python<'_>,
    op: &PyOperator,
    problem: &PyProblem,
    tol: f64,
    max_sweeps: usize,
    method: &str,
    tol_u: Option<f64>,
) -> PyResult<PySolveResult> {
    let opts = solver_options(tol, max_sweeps, method, tol_u)?;
    let inner = py
        .detach(|| fracobs::solve_vi(&op.inner, &problem.inner, &opts))
        .py_err()?;
    Ok(PySolveResult { inner })
}

#[pyfunction]
#[pyo3(signature = (op, problem, eps, theta = "ramp", tol = 1e-8, max_sweeps = 100_000, method = "newton"))]
#[allow(clippy::too_many_arguments)]
fn solve_penalized(
    py: Python<'_>,
    op: &PyOperator,
    problem: &PyProblem,
    eps: f64,
    theta: &str,
    tol: f64,
    max_sweeps: usize,
    method: &str,
) -> PyResult<PySolveResult> {
    let opts = solver_options(tol, max_sweeps, method, None)?;
    let pen = fracobs::PenaltyFn::new(eps, parse(theta)?).py_err()?;
    let inner = py
        .detach(|| fracobs::solve_penalized(&op.inner, &problem.inner, &pen, &opts))
        .py_err()?;
    Ok(PySolveResult { inner })
}

#[pyfunction]
fn complementarity_residual(op: &PyOperator, u: Vec<f64>, problem: &PyProblem) -> PyResult<f64> {
    let u = op.grid.function(u)?;
    fracobs::complementarity_residual(&op.inner, &u, &problem.inner).py_err()
}

#[pyfunction]
fn lewy_stampacchia_residual(op: &PyOperator, result: &PySolveResult, problem: &PyProblem) -> PyResult<f64> {
    fracobs::lewy_stampacchia_residual(&op.inner, &result.inner, &problem.inner).py_err()
}

/// Returns `(theta, valid_mask)`; masked nodes carry `nan`.
#[pyfunction]
#[pyo3(signature = (result, problem, tol_f = 1e-12))]
fn recover_quasi_characteristic(result: &PySolveResult, problem: &PyProblem, tol_f: f64) -> PyResult<ThetaMask> {
    let q = fracobs::recover_quasi_characteristic(&result.inner, &problem.inner, tol_f).py_err()?;
    let theta = q
        .theta
        .values()
        .iter()
        .zip(&q.valid_mask)
        .map(|(&t, &ok)| if ok { t } else { f64::NAN })
        .collect();
    Ok((theta, q.valid_mask))
}

#[pyfunction]
fn gagliardo_seminorm(grid: &PyGrid, order: f64, p: f64, v: Vec<f64>) -> PyResult<f64> {
    let v = grid.function(v)?;
    Ok(fracobs::gagliardo_seminorm(&grid.inner, order, p, &v).py_err()?.value)
}

/// Returns `(indices, intervals)` of nodes with `u <= tol_u`.
#[pyfunction]
fn coincidence_set(grid: &PyGrid, u: Vec<f64>, tol_u: f64) -> PyResult<(Vec<usize>, Intervals)> {
    let c = fracobs::coincidence_set(&grid.function(u)?, tol_u);
    Ok((c.indices, c.intervals))
}

#[pyfunction]
fn hausdorff_distance(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> f64 {
    fracobs::hausdorff_distance(&a, &b)
}

#[pyfunction]
#[pyo3(signature = (grid, u, beta, window = (-0.9, 0.9)))]
fn holder_seminorm(grid: &PyGrid, u: Vec<f64>, beta: f64, window: (f64, f64)) -> PyResult<f64> {
    fracobs::holder_seminorm(&grid.function(u)?, beta, window).py_err()
}

#[pyfunction]
fn fit_rate(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    let f = fracobs::fit_rate(&points).py_err()?;
    Ok((f.slope, f.intercept))
}

#[pyclass(name = "SweepReport", module = "fracobs_py", frozen)]
pub struct PySweepReport {
    inner: fracobs::SweepReport,
}

#[pymethods]
impl PySweepReport {
    #[getter]
    fn params(&self) -> Vec<f64> {
        self.inner.rows.iter().map(|r| r.param).collect()
    }

    #[getter]
    fn all_converged(&self) -> bool {
        self.inner.all_converged()
    }

    #[getter]
    fn flagged(&self) -> Vec<f64> {
        self.inner.flagged.clone()
    }

    /// `{metric: (slope, intercept)}` of the log-log fits.
    #[getter]
    fn rate_fits(&self) -> BTreeMap<String, (f64, f64)> {
        self.inner
            .rate_fits
            .iter()
            .map(|(k, f)| (k.clone(), (f.slope, f.intercept)))
            .collect()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        if self.inner.rows.first().is_some_and(|r| r.metric(name).is_none()) {
            return Err(PyValueError::new_err(format!("unknown metric `{name}`")));
        }
        Ok(self.inner.column(name))
    }

    fn to_csv(&self) -> String {
        fracobs::Report::Sweep(&self.inner).to_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        to_json_string(&self.inner).py_err()
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

fn sweep_options(tol: f64, warm_start: bool) -> fracobs::SweepOptions {
    fracobs::SweepOptions {
        solver: fracobs::SolverOptions::with_tol(tol),
        warm_start,
        ..fracobs::SweepOptions::default()
    }
}

#[pyfunction]
#[pyo3(signature = (problem, s, p, eps_list, tol = 1e-8, warm_start = true))]
fn run_eps_sweep(
    py: Python<'_>,
    problem: &PyProblem,
    s: f64,
    p: f64,
    eps_list: Vec<f64>,
    tol: f64,
    warm_start: bool,
) -> PyResult<PySweepReport> {
    let params = FractionalParams::new(s, p).py_err()?;
    let opts = sweep_options(tol, warm_start);
    let inner = py
        .detach(|| fracobs::run_eps_sweep(&problem.inner, params, &eps_list, &opts))
        .py_err()?;
    Ok(PySweepReport { inner })
}

/// `r` defaults to 0.5 for `sigma = 1` and `sigma - 0.2` otherwise.
#[pyfunction]
#[pyo3(signature = (problem, p, s_list, sigma = 1.0, r = None, tol = 1e-8, warm_start = true))]
#[allow(clippy::too_many_arguments)]
fn run_s_sweep(
    py: Python<'_>,
    problem: &PyProblem,
    p: f64,
    s_list: Vec<f64>,
    sigma: f64,
    r: Option<f64>,
    tol: f64,
    warm_start: bool,
) -> PyResult<PySweepReport> {
    let r = r.unwrap_or_else(|| fracobs::harness::default_order(sigma));
    let opts = sweep_options(tol, warm_start);
    let inner = py
        .detach(|| fracobs::run_s_sweep(&problem.inner, p, &s_list, sigma, r, &opts))
        .py_err()?;
    Ok(PySweepReport { inner })
}

/// Returns `(rows, final_gap)` with rows `(s, seminorm_p, gradient_norm_p, rel_gap)`.
#[pyfunction]
#[pyo3(signature = (function, p, s_list, rel_tol = 1e-6))]
fn bbm_check(function: &str, p: f64, s_list: Vec<f64>, rel_tol: f64) -> PyResult<(Vec<BbmRow>, f64)> {
    let t = fracobs::bbm_check(parse(function)?, p, &s_list, rel_tol).py_err()?;
    let rows = t
        .rows
        .iter()
        .map(|r| (r.s, r.seminorm_p, r.gradient_norm_p, r.rel_gap))
        .collect();
    Ok((rows, t.final_gap))
}

/// Returns `(passed, notes)`.
#[pyfunction]
#[pyo3(signature = (seed = 42, n_pairs = 10_000, p_list = vec![1.5, 2.0, 3.0, 4.0]))]
fn check_pineq(seed: u64, n_pairs: usize, p_list: Vec<f64>) -> (bool, Vec<String>) {
    let o = fracobs::checks::check_pineq(seed, n_pairs, &p_list);
    (o.passed, o.notes)
}

#[pymodule]
pub fn fracobs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolveResult>()?;
    m.add_class::<PySweepReport>()?;
    m.add_function(wrap_pyfunction!(solve_vi, m)?)?;
    m.add_function(wrap_pyfunction!(solve_penalized, m)?)?;
    m.add_function(wrap_pyfunction!(complementarity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(lewy_stampacchia_residual, m)?)?;
    m.add_function(wrap_pyfunction!(recover_quasi_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(gagliardo_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(coincidence_set, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff_distance, m)?)?;
    m.add_function(wrap_pyfunction!(holder_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_eps_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_s_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(bbm_check, m)?)?;
    m.add_function(wrap_pyfunction!(check_pineq, m)?)?;
    Ok(())
}
