//! Python bindings. Reports that are plain data cross the boundary as JSON
//! strings; decode them with `json.loads`.

use std::path::PathBuf;

use approach_core::approach_full::convex_approachable_full;
use approach_core::approach_partial::{compatible_payoffs_flat, convex_approachable_partial};
use approach_core::convex::{Halfspace, Polytope as CorePolytope};
use approach_core::error::Error;
use approach_core::game::Game as CoreGame;
use approach_core::harness::{self, CheckConfig, Mode, RunConfig};
use approach_core::informative::smooth as core_smooth;
use approach_core::transport::{self, DiscreteMeasure};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(|e: Error| err(e))
}

#[pyclass(module = "approach_py", skip_from_py_object)]
#[derive(Clone)]
struct Game {
    inner: CoreGame,
}

#[pymethods]
impl Game {
    #[new]
    #[pyo3(signature = (payoffs, signal_labels=None, signal_law=None))]
    fn new(
        payoffs: Vec<Vec<Vec<f64>>>,
        signal_labels: Option<Vec<String>>,
        signal_law: Option<Vec<Vec<Vec<f64>>>>,
    ) -> PyResult<Self> {
        let inner = match (signal_labels, signal_law) {
            (Some(l), Some(s)) => CoreGame::new(payoffs, l, s),
            (None, None) => CoreGame::full_monitoring(payoffs),
            _ => return Err(PyValueError::new_err("signal_labels and signal_law go together")),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn example1() -> Self {
        Self { inner: CoreGame::example1() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreGame::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn num_actions(&self) -> (usize, usize) {
        (self.inner.num_actions_p1(), self.inner.num_actions_p2())
    }

    #[getter]
    fn payoff_dim(&self) -> usize {
        self.inner.payoff_dim()
    }

    fn mixed_payoff(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.mixed_payoff(&x, &y).map_err(err)
    }

    fn flag(&self, y: Vec<f64>) -> Vec<f64> {
        self.inner.flag_vector(&y)
    }

    fn flag_preimage(&self, flag: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        self.inner.preimage_vertices_flat(&flag, 1e-9).map_err(err)
    }

    /// Vertices of the payoffs compatible with mixed action `x` and `flag`.
    fn compatible_payoffs(&self, x: Vec<f64>, flag: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(compatible_payoffs_flat(&self.inner, &x, &flag).map_err(err)?.vertices)
    }

    fn payoff_diameter(&self) -> f64 {
        self.inner.payoff_diameter()
    }

    fn __repr__(&self) -> String {
        format!(
            "Game(I={}, J={}, k={}, signals={})",
            self.inner.num_actions_p1(),
            self.inner.num_actions_p2(),
            self.inner.payoff_dim(),
            self.inner.num_signals()
        )
    }
}

#[pyclass(module = "approach_py", skip_from_py_object)]
#[derive(Clone)]
struct Polytope {
    inner: CorePolytope,
}

#[pymethods]
impl Polytope {
    #[staticmethod]
    fn from_vertices(points: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: CorePolytope::from_vertices(&points).map_err(err)? })
    }

    /// `{z : a·z <= b}` for each `(a, b)`, intersected with the box `[lo, hi]`
    /// when both are given.
    #[staticmethod]
    #[pyo3(signature = (halfspaces, lo=None, hi=None))]
    fn from_halfspaces(halfspaces: Vec<(Vec<f64>, f64)>, lo: Option<Vec<f64>>, hi: Option<Vec<f64>>) -> PyResult<Self> {
        let hs = halfspaces
            .into_iter()
            .map(|(a, b)| Halfspace::new(a, b))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let inner = match (lo, hi) {
            (Some(lo), Some(hi)) => CorePolytope::halfspaces_in_box(&hs, &lo, &hi),
            (None, None) => CorePolytope::from_halfspaces(hs),
            _ => return Err(PyValueError::new_err("lo and hi go together")),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<f64>> {
        self.inner.vertices().to_vec()
    }

    fn distance(&self, z: Vec<f64>) -> f64 {
        self.inner.distance(&z)
    }

    fn project(&self, z: Vec<f64>) -> Vec<f64> {
        self.inner.project(&z).0
    }

    #[pyo3(signature = (z, tol=1e-9))]
    fn contains(&self, z: Vec<f64>, tol: f64) -> bool {
        self.inner.contains(&z, tol)
    }
}

#[pyclass(module = "approach_py", skip_from_py_object)]
#[derive(Clone)]
struct Measure {
    inner: DiscreteMeasure,
}

#[pymethods]
impl Measure {
    #[new]
    fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: DiscreteMeasure::new(atoms, weights).map_err(err)? })
    }

    #[getter]
    fn atoms(&self) -> Vec<Vec<f64>> {
        self.inner.atoms().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn mean(&self) -> Vec<f64> {
        self.inner.mean()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Squared 2-Wasserstein cost and optimal coupling.
#[pyfunction]
fn w2(mu: &Measure, nu: &Measure) -> PyResult<(f64, Vec<Vec<f64>>)> {
    let sol = transport::w2(&mu.inner, &nu.inner).map_err(err)?;
    Ok((sol.squared_cost, sol.plan.coupling))
}

#[pyfunction]
fn interpolate(mu: &Measure, nu: &Measure, t: f64) -> PyResult<Measure> {
    Ok(Measure { inner: transport::displacement_interpolate(&mu.inner, &nu.inner, t).map_err(err)? })
}

/// Full-support measure within squared distance `epsilon`, and the mixing weight.
#[pyfunction]
fn smooth(theta: &Measure, epsilon: f64) -> PyResult<(Measure, f64)> {
    let (m, l) = core_smooth(&theta.inner, epsilon).map_err(err)?;
    Ok((Measure { inner: m }, l))
}

/// Condition check of a convex target; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (game, target, grid_density=10, full_monitoring=false))]
fn check_condition(game: &Game, target: &Polytope, grid_density: usize, full_monitoring: bool) -> PyResult<String> {
    let rep = if full_monitoring {
        convex_approachable_full(&game.inner.with_full_monitoring(), &target.inner, grid_density)
    } else {
        convex_approachable_partial(&game.inner, &target.inner, grid_density)
    }
    .map_err(err)?;
    serde_json::to_string(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Same as `approach check` on files; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (mode, game=None, target=None, grid_density=10, convex_game=false))]
fn check_files(
    mode: &str,
    game: Option<PathBuf>,
    target: Option<PathBuf>,
    grid_density: usize,
    convex_game: bool,
) -> PyResult<String> {
    let mut cfg = CheckConfig::new(parse_mode(mode)?, game, target);
    cfg.grid_density = grid_density;
    cfg.convex_game = convex_game;
    let rep = harness::check(&cfg).map_err(err)?;
    serde_json::to_string(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Same as `approach run` on files; returns one CSV trace per replica.
#[pyfunction]
#[pyo3(signature = (mode, target, game=None, horizon=1000, seed=0, adversary="uniform", sampled=false, replicas=1))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    mode: &str,
    target: PathBuf,
    game: Option<PathBuf>,
    horizon: usize,
    seed: u64,
    adversary: &str,
    sampled: bool,
    replicas: usize,
) -> PyResult<Vec<String>> {
    let mut cfg = RunConfig::new(parse_mode(mode)?, game, target);
    cfg.horizon = horizon;
    cfg.seed = seed;
    cfg.adversary = adversary.into();
    cfg.sampled = sampled;
    cfg.replicas = replicas;
    let traces = py.detach(|| harness::run(&cfg)).map_err(err)?;
    Ok(traces.iter().map(|t| t.to_csv()).collect())
}

#[pymodule]
fn approach_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Game>()?;
    m.add_class::<Polytope>()?;
    m.add_class::<Measure>()?;
    m.add_function(wrap_pyfunction!(w2, m)?)?;
    m.add_function(wrap_pyfunction!(interpolate, m)?)?;
    m.add_function(wrap_pyfunction!(smooth, m)?)?;
    m.add_function(wrap_pyfunction!(check_condition, m)?)?;
    m.add_function(wrap_pyfunction!(check_files, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
