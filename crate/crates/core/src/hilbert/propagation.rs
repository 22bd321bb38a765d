use super::{DensityState, HamiltonianFamily, PhysicsConfig, TimeGrid};
use crate::error::{BqmError, Result};
use crate::linalg::{matrix_exponential, polar_reunitarize, ComplexMatrix, C64};

/// Single-step approximation of the time-ordered exponential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StepScheme {
    /// `exp(-(i/hbar) H(t_mid) dt)`, second order.
    Midpoint,
    /// Two-point Gauss-Legendre Magnus expansion, fourth order.
    #[default]
    Magnus4,
}

/// Step propagator `U(t_to, t_from)`; `t_to < t_from` steps backwards.
pub fn step_propagator(
    h: &HamiltonianFamily,
    t_from: f64,
    t_to: f64,
    cfg: &PhysicsConfig,
) -> Result<ComplexMatrix> {
    let dt = t_to - t_from;
    if dt == 0.0 {
        return Ok(ComplexMatrix::identity(h.dim()));
    }
    let gen = C64::new(0.0, -1.0 / cfg.hbar);
    let exponent = match cfg.scheme {
        StepScheme::Midpoint => h.at(t_from + 0.5 * dt).scale(gen * dt),
        StepScheme::Magnus4 => {
            let off = 3f64.sqrt() / 6.0;
            let a1 = h.at(t_from + (0.5 - off) * dt).scale(gen);
            let a2 = h.at(t_from + (0.5 + off) * dt).scale(gen);
            let comm = &(&a2 * &a1) - &(&a1 * &a2);
            &(&a1 + &a2).scale_real(0.5 * dt) + &comm.scale_real(3f64.sqrt() / 12.0 * dt * dt)
        }
    };
    matrix_exponential(&exponent)
}

/// Evolution operator `U(t_to, t_from)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    pub matrix: ComplexMatrix,
    pub t_from: f64,
    pub t_to: f64,
}

impl Propagator {
    pub fn identity(dim: usize, t: f64) -> Self {
        Propagator {
            matrix: ComplexMatrix::identity(dim),
            t_from: t,
            t_to: t,
        }
    }

    /// `U(t_from, t_to) = U(t_to, t_from)^dagger`.
    pub fn inverse(&self) -> Propagator {
        Propagator {
            matrix: self.matrix.adjoint(),
            t_from: self.t_to,
            t_to: self.t_from,
        }
    }

    /// `self ∘ earlier`, requiring `earlier.t_to == self.t_from`.
    pub fn compose(&self, earlier: &Propagator) -> Result<Propagator> {
        if !times_match(earlier.t_to, self.t_from) {
            return Err(BqmError::contract(format!(
                "cannot compose U({}, {}) after U({}, {})",
                self.t_to, self.t_from, earlier.t_to, earlier.t_from
            )));
        }
        Ok(Propagator {
            matrix: &self.matrix * &earlier.matrix,
            t_from: earlier.t_from,
            t_to: self.t_to,
        })
    }
}

pub(crate) fn times_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Time-ordered product of step propagators over `grid`, re-unitarized
/// every `cfg.reunitarize_every` steps.
pub fn evolution_operator(
    h: &HamiltonianFamily,
    grid: &TimeGrid,
    cfg: &PhysicsConfig,
) -> Result<Propagator> {
    h.require_in_domain(grid.t0, "grid start")?;
    h.require_in_domain(grid.t1, "grid end")?;
    let mut u = ComplexMatrix::identity(h.dim());
    if grid.t0 == grid.t1 {
        return Ok(Propagator::identity(h.dim(), grid.t0));
    }
    let every = cfg.reunitarize_every.max(1);
    for k in 0..grid.steps {
        let step = step_propagator(h, grid.time(k), grid.time(k + 1), cfg)?;
        u = &step * &u;
        if (k + 1) % every == 0 {
            u = polar_reunitarize(&u, &cfg.tolerance)?;
        }
    }
    Ok(Propagator {
        matrix: u,
        t_from: grid.t0,
        t_to: grid.t1,
    })
}

/// `rho(t) = U rho(t0) U^dagger`.
pub fn propagate_density(rho0: &DensityState, u: &Propagator) -> Result<DensityState> {
    if !times_match(rho0.time, u.t_from) {
        return Err(BqmError::contract(format!(
            "density is at t = {} but the propagator starts at {}",
            rho0.time, u.t_from
        )));
    }
    rho0.rho.ensure_same_dim(&u.matrix)?;
    Ok(DensityState {
        rho: rho0.rho.conjugate_by(&u.matrix),
        time: u.t_to,
    })
}

/// Evolution operators from the domain start to the nodes of a uniform
/// lattice covering the Hamiltonian domain.
///
/// `U(t, s)` for arbitrary `t, s` is assembled as `W(t) W(s)^dagger` with
/// `W(tau) = U(tau, node) U(node, start)` and `node` the lattice point at or
/// below `tau`. `W` is smooth inside each lattice cell, so finite differences
/// of lattice propagators do not pick up discretization noise.
#[derive(Clone, Debug)]
pub struct PropagatorLattice {
    hamiltonian: HamiltonianFamily,
    cfg: PhysicsConfig,
    spacing: f64,
    cumulative: Vec<ComplexMatrix>,
}

/// Upper bound on the number of stored lattice nodes.
const MAX_NODES: usize = 1 << 20;

impl PropagatorLattice {
    /// `density` is the number of lattice cells per unit time.
    pub fn new(h: &HamiltonianFamily, cfg: &PhysicsConfig, density: f64) -> Result<Self> {
        if !(density.is_finite() && density > 0.0) {
            return Err(BqmError::contract(format!("lattice density must be positive, got {density}")));
        }
        let domain = h.domain();
        let cells = ((domain.length() * density).ceil() as usize).max(1);
        if cells > MAX_NODES {
            return Err(BqmError::contract(format!(
                "lattice would need {cells} cells; reduce the density or the domain"
            )));
        }
        let spacing = domain.length() / cells as f64;
        let every = cfg.reunitarize_every.max(1);
        let mut cumulative = Vec::with_capacity(cells + 1);
        let mut u = ComplexMatrix::identity(h.dim());
        cumulative.push(u.clone());
        for k in 0..cells {
            let a = domain.start + spacing * k as f64;
            let b = if k + 1 == cells { domain.end } else { domain.start + spacing * (k + 1) as f64 };
            u = &step_propagator(h, a, b, cfg)? * &u;
            if (k + 1) % every == 0 {
                u = polar_reunitarize(&u, &cfg.tolerance)?;
            }
            cumulative.push(u.clone());
        }
        Ok(PropagatorLattice {
            hamiltonian: h.clone(),
            cfg: *cfg,
            spacing,
            cumulative,
        })
    }

    pub fn hamiltonian(&self) -> &HamiltonianFamily {
        &self.hamiltonian
    }

    pub fn config(&self) -> &PhysicsConfig {
        &self.cfg
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `U(tau, domain start)`.
    pub fn from_start(&self, tau: f64) -> Result<ComplexMatrix> {
        self.hamiltonian.require_in_domain(tau, "lattice query")?;
        let start = self.hamiltonian.domain().start;
        let cells = self.cumulative.len() - 1;
        let cell = if self.spacing > 0.0 {
            (((tau - start) / self.spacing).floor().max(0.0) as usize).min(cells - 1)
        } else {
            0
        };
        let node = start + self.spacing * cell as f64;
        let partial = step_propagator(&self.hamiltonian, node, tau, &self.cfg)?;
        Ok(&partial * &self.cumulative[cell])
    }

    /// `U(t, s)`.
    pub fn propagator(&self, t: f64, s: f64) -> Result<Propagator> {
        let matrix = if t == s {
            ComplexMatrix::identity(self.hamiltonian.dim())
        } else {
            &self.from_start(t)? * &self.from_start(s)?.adjoint()
        };
        Ok(Propagator {
            matrix,
            t_from: s,
            t_to: t,
        })
    }
}
