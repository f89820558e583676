//! Python bindings: `import ucx`.
//!
//! Points are `(x1, x2, x3)` tuples; step pairs are lists of
//! `(weight, f, g)` atoms. Invalid input raises `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use ucx_core::bellman::{self, Atom, SearchBudget, StepFunction, StepPair};
use ucx_core::certificates::{self, DEFAULT_S_MAX};
use ucx_core::domain;
use ucx_core::envelope;
use ucx_core::moduli;
use ucx_core::{Exponent, LambdaPoint, ModulusQuery, Theta};

type Point = (f64, f64, f64);
type AtomTuple = (f64, f64, f64);

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn exponent(p: f64) -> PyResult<Exponent> {
    Exponent::new(p).map_err(value_error)
}

fn theta(t: f64) -> PyResult<Theta> {
    Theta::new(t).map_err(value_error)
}

fn query(p: f64, eps: f64) -> PyResult<ModulusQuery> {
    ModulusQuery::from_raw(p, eps).map_err(value_error)
}

fn point((x1, x2, x3): Point) -> LambdaPoint {
    LambdaPoint::new(x1, x2, x3)
}

fn tuple(x: LambdaPoint) -> Point {
    (x.x1, x.x2, x.x3)
}

fn step_pair(atoms: Vec<AtomTuple>) -> PyResult<StepPair> {
    StepPair::new(atoms.into_iter().map(|(w, f, g)| Atom::new(w, f, g)).collect()).map_err(value_error)
}

/// δ(ε) by the route for the regime of `p`.
#[pyfunction]
pub fn delta(p: f64, eps: f64) -> PyResult<f64> {
    moduli::delta(query(p, eps)?).map_err(value_error)
}

#[pyfunction]
pub fn delta_closed_form(p: f64, eps: f64) -> PyResult<f64> {
    moduli::delta_closed_form(query(p, eps)?).map_err(value_error)
}

#[pyfunction]
pub fn delta_via_s_star(p: f64, eps: f64) -> PyResult<f64> {
    moduli::delta_via_s_star(query(p, eps)?).map_err(value_error)
}

#[pyfunction]
pub fn delta_implicit(p: f64, eps: f64) -> PyResult<f64> {
    moduli::delta_implicit(query(p, eps)?).map_err(value_error)
}

#[pyfunction]
pub fn cross_check_residual(p: f64, eps: f64) -> PyResult<f64> {
    moduli::cross_check_residual(query(p, eps)?).map_err(value_error)
}

/// The root of `s + g(s) = 2ε^{-p}` for `1 < p <= 2`.
#[pyfunction]
pub fn s_star(p: f64, eps: f64) -> PyResult<f64> {
    Ok(moduli::solve_s_star(query(p, eps)?).map_err(value_error)?.s_star)
}

/// `(g, f, g', f')` of the slice at `s`.
#[pyfunction]
pub fn boundary_profile(s: f64, p: f64) -> PyResult<(f64, f64, f64, f64)> {
    let prof = domain::boundary_profile(s, exponent(p)?).map_err(value_error)?;
    Ok((prof.g, prof.f, prof.g_prime, prof.f_prime))
}

/// Face name (`face1`, `face2`, `face3`), `interior` or `outside`.
#[pyfunction]
#[pyo3(signature = (x, p, tol = domain::FACE_TOL))]
pub fn contains(x: Point, p: f64, tol: f64) -> PyResult<String> {
    Ok(domain::contains(point(x), exponent(p)?, tol).map_err(value_error)?.to_string())
}

#[pyfunction]
#[pyo3(signature = (x, p, theta = 0.5))]
pub fn boundary_value(x: Point, p: f64, theta: f64) -> PyResult<f64> {
    domain::boundary_value(point(x), exponent(p)?, self::theta(theta)?).map_err(value_error)
}

#[pyfunction]
pub fn moment(atoms: Vec<AtomTuple>, p: f64) -> PyResult<Point> {
    Ok(tuple(bellman::moment(&step_pair(atoms)?, exponent(p)?)))
}

#[pyfunction]
#[pyo3(signature = (atoms, p, theta = 0.5))]
pub fn payoff(atoms: Vec<AtomTuple>, p: f64, theta: f64) -> PyResult<f64> {
    Ok(bellman::payoff(&step_pair(atoms)?, exponent(p)?, self::theta(theta)?))
}

/// Hanner gap of two step functions on the shared partition `weights`.
#[pyfunction]
pub fn hanner_gap(weights: Vec<f64>, f: Vec<f64>, g: Vec<f64>, p: f64) -> PyResult<f64> {
    let f = StepFunction::new(weights.clone(), f).map_err(value_error)?;
    let g = StepFunction::new(weights, g).map_err(value_error)?;
    bellman::hanner_gap(&f, &g, p).map_err(value_error)
}

/// An affine majorant `c0 + c · x` of the boundary data.
#[pyclass(frozen, name = "Certificate")]
pub struct PyCertificate {
    inner: certificates::Certificate,
}

#[pymethods]
impl PyCertificate {
    #[getter]
    fn c0(&self) -> f64 {
        self.inner.c0
    }

    #[getter]
    fn c(&self) -> Point {
        let [a, b, c] = self.inner.c;
        (a, b, c)
    }

    #[getter]
    fn regime(&self) -> String {
        self.inner.meta.regime.to_string()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.meta.p.get()
    }

    #[getter]
    fn eps(&self) -> Option<f64> {
        self.inner.meta.eps
    }

    #[getter]
    fn s_star(&self) -> Option<f64> {
        self.inner.meta.s_star
    }

    fn value(&self, x: Point) -> f64 {
        self.inner.value(point(x))
    }

    fn __repr__(&self) -> String {
        let [a, b, c] = self.inner.c;
        format!("Certificate(regime={}, c0={}, c=({a}, {b}, {c}))", self.inner.meta.regime, self.inner.c0)
    }
}

#[pyfunction]
#[pyo3(signature = (p, eps = None))]
pub fn certificate(p: f64, eps: Option<f64>) -> PyResult<PyCertificate> {
    let inner = certificates::certificate_for(exponent(p)?, eps).map_err(value_error)?;
    Ok(PyCertificate { inner })
}

#[pyclass(frozen, name = "VerificationReport")]
pub struct PyReport {
    inner: certificates::VerificationReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn claim(&self) -> String {
        self.inner.claim.clone()
    }

    #[getter]
    fn grid(&self) -> usize {
        self.inner.grid
    }

    #[getter]
    fn worst_value(&self) -> f64 {
        self.inner.worst_value
    }

    #[getter]
    fn worst_arg(&self) -> f64 {
        self.inner.worst_arg
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    fn __repr__(&self) -> String {
        self.inner.to_string()
    }
}

fn report(inner: certificates::VerificationReport) -> PyReport {
    PyReport { inner }
}

#[pyfunction]
#[pyo3(signature = (p, eps = None, grid_n = 10001, s_max = DEFAULT_S_MAX))]
pub fn verify_appendix(p: f64, eps: Option<f64>, grid_n: usize, s_max: f64) -> PyResult<Vec<PyReport>> {
    let reports = certificates::verify_appendix(exponent(p)?, eps, grid_n, s_max).map_err(value_error)?;
    Ok(reports.into_iter().map(report).collect())
}

#[pyfunction]
#[pyo3(signature = (p, eps = 1.0, s_probe = 1e6, n_chord = 1001))]
pub fn sharpness_check(p: f64, eps: f64, s_probe: f64, n_chord: usize) -> PyResult<PyReport> {
    Ok(report(certificates::sharpness_check(exponent(p)?, eps, s_probe, n_chord).map_err(value_error)?))
}

#[pyfunction]
pub fn touching_check(cert: &PyCertificate) -> PyResult<PyReport> {
    Ok(report(certificates::touching_check(&cert.inner).map_err(value_error)?))
}

#[pyfunction]
#[pyo3(signature = (p, eps, trials = 10_000, seed = 0))]
pub fn witness_test(p: f64, eps: f64, trials: usize, seed: u64) -> PyResult<PyReport> {
    Ok(report(bellman::witness_test(exponent(p)?, eps, trials, seed).map_err(value_error)?))
}

/// A feasible lower bound for the Bellman function with its witness pair.
#[pyclass(frozen, name = "BruteForceResult")]
pub struct PyBruteForce {
    inner: bellman::BruteForceResult,
}

#[pymethods]
impl PyBruteForce {
    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn x(&self) -> Point {
        tuple(self.inner.x)
    }

    #[getter]
    fn atoms(&self) -> Vec<AtomTuple> {
        self.inner.witness.atoms().iter().map(|a| (a.weight, a.f, a.g)).collect()
    }

    /// The text serialization of the witness.
    fn witness(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("BruteForceResult(value={}, residual={})", self.inner.value, self.inner.residual)
    }
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (x, p, theta = 0.5, restarts = 200, local_steps = 2000, seed = 0, penalty = 1e8))]
pub fn brute_force(
    py: Python<'_>,
    x: Point,
    p: f64,
    theta: f64,
    restarts: usize,
    local_steps: usize,
    seed: u64,
    penalty: f64,
) -> PyResult<PyBruteForce> {
    let (p, th) = (exponent(p)?, self::theta(theta)?);
    let budget = SearchBudget::new(restarts, local_steps, seed, penalty).map_err(value_error)?;
    let inner = py.detach(|| bellman::brute_force_b(point(x), p, th, &budget)).map_err(value_error)?;
    Ok(PyBruteForce { inner })
}

/// Sampled boundary data; `concavify` evaluates the grid envelope.
#[pyclass(frozen, name = "ObstacleGrid")]
pub struct PyObstacleGrid {
    inner: envelope::ObstacleGrid,
}

#[pymethods]
impl PyObstacleGrid {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn points(&self) -> Vec<Point> {
        self.inner.points().iter().copied().map(tuple).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.meta().radius
    }

    fn with_points(&self, extra: Vec<Point>) -> PyResult<PyObstacleGrid> {
        let extra: Vec<LambdaPoint> = extra.into_iter().map(point).collect();
        Ok(PyObstacleGrid { inner: self.inner.with_points(&extra).map_err(value_error)? })
    }

    /// `(value, [(index, weight), ...])`.
    fn concavify(&self, py: Python<'_>, x: Point) -> PyResult<(f64, Vec<(usize, f64)>)> {
        let q = py.detach(|| envelope::concavify(&self.inner, point(x))).map_err(value_error)?;
        Ok((q.result, q.active_weights))
    }

    /// `[(x3, B̂(1, 1, x3)), ...]`.
    fn envelope_slice(&self, py: Python<'_>, x3: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        let meta = self.inner.meta();
        py.detach(|| envelope::envelope_slice(meta.p, meta.theta, &x3, &self.inner)).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        let meta = self.inner.meta();
        format!("ObstacleGrid(p={}, points={}, radius={})", meta.p, self.inner.len(), meta.radius)
    }
}

/// Samples the faces of the cone; the radius defaults to one that contains
/// the chord for `eps` and the point `(1, 1, 2^p)`.
#[pyfunction]
#[pyo3(signature = (p, n_per_face = 60, theta = 0.5, radius = None, eps = None))]
pub fn sample_boundary(p: f64, n_per_face: usize, theta: f64, radius: Option<f64>, eps: Option<f64>) -> PyResult<PyObstacleGrid> {
    let p = exponent(p)?;
    let radius = radius.unwrap_or_else(|| envelope::default_radius(p, eps));
    let inner = envelope::sample_boundary(p, self::theta(theta)?, n_per_face, radius).map_err(value_error)?;
    Ok(PyObstacleGrid { inner })
}

#[pymodule]
#[pyo3(name = "ucx")]
pub fn ucx_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(delta_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(delta_via_s_star, m)?)?;
    m.add_function(wrap_pyfunction!(delta_implicit, m)?)?;
    m.add_function(wrap_pyfunction!(cross_check_residual, m)?)?;
    m.add_function(wrap_pyfunction!(s_star, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_profile, m)?)?;
    m.add_function(wrap_pyfunction!(contains, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_value, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(payoff, m)?)?;
    m.add_function(wrap_pyfunction!(hanner_gap, m)?)?;
    m.add_function(wrap_pyfunction!(certificate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_appendix, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_check, m)?)?;
    m.add_function(wrap_pyfunction!(touching_check, m)?)?;
    m.add_function(wrap_pyfunction!(witness_test, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(sample_boundary, m)?)?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyBruteForce>()?;
    m.add_class::<PyObstacleGrid>()?;
    Ok(())
}
