//! Conventional Hilbert-space description of mixed states: ensembles,
//! density operators, the evolution operator and the von Neumann equation.

mod hamiltonian;
mod integrate;
mod propagation;

pub use hamiltonian::{HamiltonianFamily, Interval, TimeGrid};
pub use integrate::{integrate_liouville, integrate_von_neumann};
pub use propagation::{
    evolution_operator, propagate_density, step_propagator, Propagator, PropagatorLattice, StepScheme,
};

use crate::error::{BqmError, Result};
use crate::linalg::{hermitian_eigensystem, ComplexMatrix, Tolerance, C64};

/// Physical constants and propagation settings.
#[derive(Clone, Copy, Debug)]
pub struct PhysicsConfig {
    pub hbar: f64,
    pub scheme: StepScheme,
    /// Products of step propagators are re-projected onto the unitary group
    /// every this many steps.
    pub reunitarize_every: usize,
    pub tolerance: Tolerance,
}

impl PhysicsConfig {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(BqmError::contract(format!("hbar must be positive, got {hbar}")));
        }
        Ok(PhysicsConfig {
            hbar,
            ..PhysicsConfig::default()
        })
    }

    pub fn with_scheme(mut self, scheme: StepScheme) -> Self {
        self.scheme = scheme;
        self
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            hbar: 1.0,
            scheme: StepScheme::Magnus4,
            reunitarize_every: 64,
            tolerance: Tolerance::default(),
        }
    }
}

/// Reference-space state vector; need not be normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(pub Vec<C64>);

impl StateVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleMember {
    pub weight: f64,
    pub vector: StateVector,
}

/// Finite statistical ensemble with time-independent weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub members: Vec<EnsembleMember>,
}

impl Ensemble {
    pub fn new(members: Vec<EnsembleMember>) -> Self {
        Ensemble { members }
    }

    /// Check the weight and vector constraints, returning the common dimension.
    pub fn validate(&self, tol: &Tolerance) -> Result<usize> {
        validate_weighted(
            self.members.iter().map(|m| (m.weight, m.vector.as_slice())),
            tol,
        )
    }

    /// Every member vector evolved by `u`.
    pub fn evolved(&self, u: &Propagator) -> Ensemble {
        Ensemble {
            members: self
                .members
                .iter()
                .map(|m| EnsembleMember {
                    weight: m.weight,
                    vector: StateVector(u.matrix.apply(m.vector.as_slice())),
                })
                .collect(),
        }
    }
}

pub(crate) fn validate_weighted<'a>(
    members: impl Iterator<Item = (f64, &'a [C64])>,
    tol: &Tolerance,
) -> Result<usize> {
    let mut dim = None;
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, (w, v)) in members.enumerate() {
        count += 1;
        if !(w.is_finite() && (0.0..=1.0).contains(&w)) {
            return Err(BqmError::contract(format!("weight {i} = {w} outside [0, 1]")));
        }
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(BqmError::Shape {
                    expected: d,
                    found: v.len(),
                })
            }
            _ => {}
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(BqmError::contract(format!("member {i} has zero or non-finite norm")));
        }
        total += w;
    }
    if count == 0 {
        return Err(BqmError::contract("ensemble is empty"));
    }
    if !tol.accepts((total - 1.0).abs(), 1.0) {
        return Err(BqmError::contract(format!("weights sum to {total}, not 1")));
    }
    Ok(dim.unwrap())
}

/// `sum_i p_i v_i v_i^dagger / <v_i|v_i>`.
pub(crate) fn weighted_projector_sum<'a>(
    dim: usize,
    members: impl Iterator<Item = (f64, &'a [C64])>,
) -> ComplexMatrix {
    let mut rho = ComplexMatrix::zeros(dim);
    for (w, v) in members {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        rho += &ComplexMatrix::outer(v, v).scale_real(w / norm);
    }
    rho
}

/// Validated density operator at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    pub rho: ComplexMatrix,
    pub time: f64,
}

impl DensityState {
    pub fn new(rho: ComplexMatrix, time: f64, tol: &Tolerance) -> Result<Self> {
        let report = validate_density(&rho, tol);
        if !report.all_pass() {
            return Err(BqmError::contract(format!("not a density operator: {report}")));
        }
        Ok(DensityState { rho, time })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

/// Density operator of an ensemble.
pub fn density_from_ensemble(e: &Ensemble, time: f64, tol: &Tolerance) -> Result<DensityState> {
    let dim = e.validate(tol)?;
    let rho = weighted_projector_sum(
        dim,
        e.members.iter().map(|m| (m.weight, m.vector.as_slice())),
    );
    DensityState::new(rho, time, tol)
}

/// Outcome of [`validate_density`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityReport {
    pub hermitian: bool,
    pub positive: bool,
    pub unit_trace: bool,
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
}

impl DensityReport {
    pub fn all_pass(&self) -> bool {
        self.hermitian && self.positive && self.unit_trace
    }
}

impl std::fmt::Display for DensityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hermiticity residual {:e} ({}), min eigenvalue {:e} ({}), |tr - 1| = {:e} ({})",
            self.hermiticity_residual,
            pass_word(self.hermitian),
            self.min_eigenvalue,
            pass_word(self.positive),
            self.trace_deviation,
            pass_word(self.unit_trace)
        )
    }
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// Check Hermiticity, positivity (eigenvalue floor `-tol.abs`) and unit
/// trace. Never fails; non-Hermitian input is judged on its Hermitian part
/// for the eigenvalue floor.
pub fn validate_density(rho: &ComplexMatrix, tol: &Tolerance) -> DensityReport {
    let hermiticity_residual = rho.hermiticity_residual();
    let min_eigenvalue = hermitian_eigensystem(&rho.hermitian_part(), tol)
        .map(|es| es.min())
        .unwrap_or(f64::NAN);
    let trace_deviation = (rho.trace() - C64::new(1.0, 0.0)).norm();
    DensityReport {
        hermitian: tol.accepts(hermiticity_residual, rho.frobenius_norm()),
        positive: min_eigenvalue >= -tol.abs,
        unit_trace: tol.accepts(trace_deviation, 1.0),
        hermiticity_residual,
        min_eigenvalue,
        trace_deviation,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Purity {
    /// `Tr(rho^2)`.
    pub value: f64,
    /// `rho^2 = rho` within tolerance.
    pub is_pure: bool,
}

pub fn purity(state: &DensityState, tol: &Tolerance) -> Purity {
    let sq = &state.rho * &state.rho;
    Purity {
        value: sq.trace().re,
        is_pure: tol.accepts(sq.distance(&state.rho), state.rho.frobenius_norm()),
    }
}

/// `Tr(rho A)` together with the discarded imaginary part.
pub fn expectation_with_residue(
    state: &DensityState,
    a: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<(f64, f64)> {
    state.rho.ensure_same_dim(a)?;
    if !a.is_hermitian(tol) {
        return Err(BqmError::contract(format!(
            "observable is not Hermitian (residual {:e})",
            a.hermiticity_residual()
        )));
    }
    let z = (&state.rho * a).trace();
    Ok((z.re, z.im))
}

/// Mean value `Tr(rho A)` of a Hermitian observable.
pub fn expectation(state: &DensityState, a: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    expectation_with_residue(state, a, tol).map(|(re, _)| re)
}
