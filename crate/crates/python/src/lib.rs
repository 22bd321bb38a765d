//! Python bindings: time evolution, bundle transport, curvature and the
//! scenario runners. Matrices cross the boundary as lists of rows of
//! Python `complex`.

use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bqm::bundle::{evolution_transport, lift_operator, transport_coefficients, FrameField, Path};
use bqm::curvature::{curvature_commutator, curvature_fd, TwoParamFamily};
use bqm::hilbert::{integrate_von_neumann, DensityState, HamiltonianFamily, Interval, PhysicsConfig, PropagatorLattice, TimeGrid};
use bqm::scenario::{self, InvariantReport};
use bqm::{BqmError, ComplexMatrix, Tolerance};

type Rows = Vec<Vec<Complex64>>;

fn err(e: BqmError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(err)
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    m.rows()
}

/// Report of named invariant checks.
#[pyclass(name = "Report", frozen)]
struct PyReport {
    inner: InvariantReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn scenario(&self) -> &str {
        &self.inner.scenario
    }

    #[getter]
    fn overall(&self) -> bool {
        self.inner.overall
    }

    /// `(name, max_deviation, threshold, pass)` per check.
    #[getter]
    fn checks(&self) -> Vec<(String, f64, f64, bool)> {
        self.inner
            .checks
            .iter()
            .map(|c| (c.name.clone(), c.max_deviation, c.threshold, c.pass))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }

    fn __bool__(&self) -> bool {
        self.inner.overall
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(scenario={:?}, checks={}, overall={})",
            self.inner.scenario,
            self.inner.checks.len(),
            self.inner.overall
        )
    }
}

/// Driven Hamiltonian `H(t) = H0 + cos(omega t) H1` on `[t_min, t_max]`,
/// with its propagator lattice.
#[pyclass(name = "Evolution", frozen)]
struct PyEvolution {
    hamiltonian: HamiltonianFamily,
    physics: PhysicsConfig,
    lattice: Arc<PropagatorLattice>,
    path: Path,
}

impl PyEvolution {
    fn frames(seed: Option<u64>) -> FrameField {
        seed.map_or_else(FrameField::identity, FrameField::random_smooth)
    }
}

#[pymethods]
impl PyEvolution {
    #[new]
    #[pyo3(signature = (h0, h1=None, omega=0.0, hbar=1.0, t_min=-1.0, t_max=2.0))]
    fn new(h0: Rows, h1: Option<Rows>, omega: f64, hbar: f64, t_min: f64, t_max: f64) -> PyResult<Self> {
        let h0 = to_matrix(h0)?;
        let h1 = match h1 {
            Some(rows) => to_matrix(rows)?,
            None => ComplexMatrix::zeros(h0.dim()),
        };
        let domain = Interval::new(t_min, t_max).map_err(err)?;
        let dim = h0.dim();
        let hamiltonian = HamiltonianFamily::new(
            dim,
            domain,
            move |t| &h0 + &h1.scale_real((omega * t).cos()),
            &Tolerance::default(),
        )
        .map_err(err)?;
        let physics = PhysicsConfig::new(hbar).map_err(err)?;
        let lattice = Arc::new(PropagatorLattice::new(&hamiltonian, &physics, 256.0).map_err(err)?);
        Ok(PyEvolution {
            hamiltonian,
            physics,
            lattice,
            path: Path::worldline("gamma", domain),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    fn hamiltonian(&self, t: f64) -> Rows {
        to_rows(&self.hamiltonian.at(t))
    }

    /// `U(t, s)`.
    fn propagator(&self, t: f64, s: f64) -> PyResult<Rows> {
        Ok(to_rows(&self.lattice.propagator(t, s).map_err(err)?.matrix))
    }

    /// `U(t, t0) rho U(t, t0)^dagger`.
    fn evolve_density(&self, rho: Rows, t0: f64, t: f64) -> PyResult<Rows> {
        let u = self.lattice.propagator(t, t0).map_err(err)?;
        Ok(to_rows(&to_matrix(rho)?.conjugate_by(&u.matrix)))
    }

    /// RK4 trajectory of the von Neumann equation, `steps + 1` matrices.
    fn integrate(&self, rho: Rows, t0: f64, t1: f64, steps: usize) -> PyResult<Vec<Rows>> {
        let grid = TimeGrid::new(t0, t1, steps).map_err(err)?;
        let rho0 = DensityState::new(to_matrix(rho)?, t0, &Tolerance::default()).map_err(err)?;
        let traj = integrate_von_neumann(&rho0, &self.hamiltonian, &grid, &self.physics).map_err(err)?;
        Ok(traj.iter().map(|s| to_rows(&s.rho)).collect())
    }

    /// Evolution transport between fibres, in identity frames or in smooth
    /// random frames drawn from `frame_seed`.
    #[pyo3(signature = (t, s, frame_seed=None))]
    fn transport(&self, t: f64, s: f64, frame_seed: Option<u64>) -> PyResult<Rows> {
        let frames = Self::frames(frame_seed);
        let tr = evolution_transport(&self.lattice, &frames, &self.path, t, s).map_err(err)?;
        Ok(to_rows(&tr.matrix))
    }

    #[pyo3(signature = (a, t, frame_seed=None))]
    fn lift(&self, a: Rows, t: f64, frame_seed: Option<u64>) -> PyResult<Rows> {
        let lifted = lift_operator(&to_matrix(a)?, &Self::frames(frame_seed), &self.path, t).map_err(err)?;
        Ok(to_rows(&lifted.matrix))
    }

    /// Transport coefficients `Γ(t)`.
    #[pyo3(signature = (t, frame_seed=None, fd_step=1e-4))]
    fn gamma(&self, t: f64, frame_seed: Option<u64>, fd_step: f64) -> PyResult<Rows> {
        let frames = Self::frames(frame_seed);
        let c = transport_coefficients(&self.hamiltonian, &frames, &self.path, t, fd_step, &self.physics)
            .map_err(err)?;
        Ok(to_rows(&c.gamma))
    }

    /// Curvature `-[H(s), H(t)] / hbar^2`.
    fn curvature(&self, s: f64, t: f64) -> PyResult<Rows> {
        Ok(to_rows(&curvature_commutator(&self.hamiltonian, s, t, &self.physics).map_err(err)?.matrix))
    }

    /// Finite-difference curvature of the coordinate-square family.
    #[pyo3(signature = (s, t, h_step=1e-3))]
    fn curvature_fd(&self, s: f64, t: f64, h_step: f64) -> PyResult<Rows> {
        let d = self.hamiltonian.domain();
        let fam = TwoParamFamily::coordinate_square(d, d, self.hamiltonian.clone(), FrameField::identity())
            .map_err(err)?;
        Ok(to_rows(&curvature_fd(&fam, s, t, h_step, &self.physics).map_err(err)?.matrix))
    }
}

#[pyfunction]
fn expm(a: Rows) -> PyResult<Rows> {
    Ok(to_rows(&to_matrix(a)?.exp().map_err(err)?))
}

/// Runs an evolve scenario from JSON text; returns the trace CSV and the report.
#[pyfunction]
#[pyo3(signature = (config, tolerance=1e-10))]
fn run_scenario(config: &str, tolerance: f64) -> PyResult<(String, PyReport)> {
    let tol = Tolerance::uniform(tolerance).map_err(err)?;
    let cfg = scenario::parse_config(config, &tol).map_err(err)?;
    let (table, report) = scenario::run_evolve(&cfg).map_err(err)?;
    Ok((table.to_csv(), PyReport { inner: report }))
}

/// Runs a curvature scenario from JSON text; returns the table CSV, the
/// flatness JSON and the report.
#[pyfunction]
#[pyo3(signature = (config, tolerance=1e-10))]
fn run_curvature(config: &str, tolerance: f64) -> PyResult<(String, String, PyReport)> {
    let tol = Tolerance::uniform(tolerance).map_err(err)?;
    let cfg = scenario::parse_config(config, &tol).map_err(err)?;
    let out = scenario::run_curvature(&cfg).map_err(err)?;
    Ok((out.to_csv(), out.flatness_json(), PyReport { inner: out.report }))
}

#[pyfunction]
fn verify(seed: u64, trials: usize, dims: Vec<usize>) -> PyResult<PyReport> {
    let report = scenario::run_verify(seed, trials, &dims).map_err(err)?;
    Ok(PyReport { inner: report })
}

#[pymodule]
fn bqm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEvolution>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(expm, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
