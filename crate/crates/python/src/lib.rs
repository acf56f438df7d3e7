//! Python bindings. Problems and weights cross the boundary as JSON text in
//! the same schema the `lab` config uses; reports come back as dicts.

use elliptic_lab::analysis::{self, ResidualMode};
use elliptic_lab::bvp1d::{self, RadialProfile, SolveConfig};
use elliptic_lab::construct;
use elliptic_lab::funcs::{self, FSpec, PhiSpec};
use elliptic_lab::problem::ProblemSpec;
use elliptic_lab::quad;
use elliptic_lab::LabError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: LabError) -> PyErr {
    match e {
        LabError::Domain(_) | LabError::Config(_) | LabError::Unsupported(_) | LabError::Refused(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse<T: DeserializeOwned>(what: &str, text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

/// Serializes through JSON into plain Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn solve_config(json: Option<&str>) -> PyResult<SolveConfig> {
    json.map_or(Ok(SolveConfig::default()), |s| parse("solve config", s))
}

#[pyclass(name = "Problem", frozen, from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        let inner: ProblemSpec = parse("problem", json)?;
        inner.validate().map_err(err)?;
        Ok(PyProblem { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).unwrap_or_default()
    }

    fn __repr__(&self) -> String {
        format!("Problem({})", self.to_json())
    }
}

/// A radial profile `u(r)` on a grid.
#[pyclass(name = "Profile", frozen, from_py_object)]
#[derive(Clone)]
struct PyProfile {
    inner: RadialProfile,
}

#[pymethods]
impl PyProfile {
    #[new]
    fn new(r: Vec<f64>, u: Vec<f64>, n: usize) -> PyResult<Self> {
        let grid = bvp1d::RadialGrid::from_nodes(r, n).map_err(err)?;
        Ok(PyProfile { inner: RadialProfile::new(grid, u).map_err(err)? })
    }

    #[staticmethod]
    fn from_csv(text: &str, n: usize) -> PyResult<Self> {
        Ok(PyProfile { inner: RadialProfile::from_csv(text, n).map_err(err)? })
    }

    #[getter]
    fn r(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn eval(&self, r: f64) -> PyResult<f64> {
        self.inner.eval(r).ok_or_else(|| PyValueError::new_err(format!("r = {r} is outside the grid")))
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.nodes().len()
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid();
        format!("Profile({} nodes on [{:e}, {:e}], N={})", g.len(), g.first(), g.last(), g.dimension())
    }
}

fn wrap(p: RadialProfile) -> PyProfile {
    PyProfile { inner: p }
}

#[pyfunction]
fn classify<'py>(py: Python<'py>, problem: &PyProblem) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &quad::classify_existence(&problem.inner).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (phi, f, solve=None))]
fn solve_h(phi: &str, f: &str, solve: Option<&str>) -> PyResult<PyProfile> {
    let phi: PhiSpec = parse("phi", phi)?;
    let f: FSpec = parse("f", f)?;
    Ok(wrap(bvp1d::solve_h(&phi, &f, &solve_config(solve)?).map_err(err)?))
}

/// Returns `(raw, extrapolated_or_None, converged)`.
#[pyfunction]
#[pyo3(signature = (problem, n_max=64, solve=None))]
fn minimal_solution(
    problem: &PyProblem,
    n_max: usize,
    solve: Option<&str>,
) -> PyResult<(PyProfile, Option<PyProfile>, bool)> {
    let s = construct::minimal_solution(&problem.inner, n_max, &solve_config(solve)?).map_err(err)?;
    Ok((wrap(s.profile), s.extrapolated.map(wrap), s.converged))
}

/// Returns `(profile, sandwich_margin)`.
#[pyfunction]
#[pyo3(signature = (problem, a, b, xi_octaves=20, octaves=18, per_octave=24, solve=None))]
fn family_member(
    problem: &PyProblem,
    a: f64,
    b: f64,
    xi_octaves: u32,
    octaves: i32,
    per_octave: usize,
    solve: Option<&str>,
) -> PyResult<(PyProfile, f64)> {
    let cfg = solve_config(solve)?;
    let xi = construct::minimal_annulus(&problem.inner, xi_octaves, per_octave, &cfg).map_err(err)?;
    let m = construct::family_member(&problem.inner, a, b, &xi, 2f64.powi(octaves), &cfg).map_err(err)?;
    Ok((wrap(m.profile), m.sandwich_margin))
}

#[pyfunction]
fn asymptotics<'py>(py: Python<'py>, profile: &PyProfile, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &analysis::asymptotics(&profile.inner, n).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (profile, problem, inequality=false))]
fn residual<'py>(
    py: Python<'py>,
    profile: &PyProfile,
    problem: &PyProblem,
    inequality: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let mode = if inequality { ResidualMode::Inequality } else { ResidualMode::Equality };
    to_py(py, &analysis::residual_radial(&profile.inner, &problem.inner, mode).map_err(err)?)
}

#[pyfunction]
fn kelvin_transform(profile: &PyProfile, n: usize) -> PyResult<PyProfile> {
    Ok(wrap(analysis::kelvin_transform(&profile.inner, n).map_err(err)?))
}

/// Kelvin-transformed weight as JSON.
#[pyfunction]
fn kelvin_weight(phi: &str, n: usize, p: f64) -> PyResult<String> {
    let phi: PhiSpec = parse("phi", phi)?;
    let k = analysis::kelvin_weight(&phi, n, p).map_err(err)?;
    serde_json::to_string(&k).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pyfunction]
fn phi_value(phi: &str, r: f64) -> PyResult<f64> {
    let phi: PhiSpec = parse("phi", phi)?;
    funcs::eval_phi(&phi, r).map_err(err)
}

#[pyfunction]
fn sphere_potential_average(n: usize, r: f64, x_norm: f64) -> PyResult<f64> {
    analysis::sphere_potential_average(n, r, x_norm).map_err(err)
}

/// `(c, q)` with `xi = c r^q`.
#[pyfunction]
fn xi_closed_form(n: usize, p: f64, alpha: f64) -> PyResult<(f64, f64)> {
    let x = funcs::xi_closed_form(n, p, alpha).map_err(err)?;
    Ok((x.c, x.q))
}

/// Tail and near-boundary certificates for `phi` at `r0`.
#[pyfunction]
#[pyo3(signature = (phi, r0=1.0, levels=16))]
fn certify_divergence<'py>(py: Python<'py>, phi: &str, r0: f64, levels: usize) -> PyResult<Bound<'py, PyAny>> {
    let phi: PhiSpec = parse("phi", phi)?;
    let tail = quad::integrate_tail_monotone(&phi, r0).map_err(err)?;
    let boundary = quad::divergence_certificate_boundary(&phi, r0, levels).map_err(err)?;
    to_py(py, &serde_json::json!({ "tail": tail, "boundary": boundary }))
}

#[pymodule(name = "elliptic_lab")]
fn elliptic_lab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(solve_h, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_solution, m)?)?;
    m.add_function(wrap_pyfunction!(family_member, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotics, m)?)?;
    m.add_function(wrap_pyfunction!(residual, m)?)?;
    m.add_function(wrap_pyfunction!(kelvin_transform, m)?)?;
    m.add_function(wrap_pyfunction!(kelvin_weight, m)?)?;
    m.add_function(wrap_pyfunction!(phi_value, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_potential_average, m)?)?;
    m.add_function(wrap_pyfunction!(xi_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(certify_divergence, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
