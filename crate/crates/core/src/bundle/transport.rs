use super::{
    DensityMorphism, EvolutionTransport, FrameField, MorphismValue, Path, StateSection, TransportCoefficients,
};
use crate::error::{BqmError, Result};
use crate::hilbert::{
    integrate_liouville, step_propagator, validate_weighted, weighted_projector_sum, DensityState,
    HamiltonianFamily, PhysicsConfig, PropagatorLattice, TimeGrid,
};
use crate::linalg::{commutator, ComplexMatrix, Tolerance, C64};

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// `l(t)^{-1} U(t, s) l(s)`.
pub fn evolution_transport(
    lattice: &PropagatorLattice,
    frames: &FrameField,
    path: &Path,
    t: f64,
    s: f64,
) -> Result<EvolutionTransport> {
    path.require_in_domain(t)?;
    path.require_in_domain(s)?;
    let dim = lattice.hamiltonian().dim();
    let u = lattice.propagator(t, s)?;
    let lt = frames.frame(path, t, dim)?;
    let ls = frames.frame(path, s, dim)?;
    Ok(EvolutionTransport {
        path_id: path.id().to_string(),
        t_from: s,
        t_to: t,
        matrix: &(&lt.adjoint() * &u.matrix) * &ls,
    })
}

/// Operator `A` seen in the fibre at `path(t)`: `l^{-1} A l`.
pub fn lift_operator(a: &ComplexMatrix, frames: &FrameField, path: &Path, t: f64) -> Result<MorphismValue> {
    let l = frames.frame(path, t, a.dim())?;
    Ok(MorphismValue {
        path_id: path.id().to_string(),
        time: t,
        matrix: a.conjugate_by_adjoint(&l),
    })
}

/// Density morphism `Ρ_γ(t) = l^{-1} ρ(t) l` at the time of `rho`.
pub fn density_morphism(rho: &DensityState, frames: &FrameField, path: &Path) -> Result<DensityMorphism> {
    lift_operator(&rho.rho, frames, path, rho.time).map(DensityMorphism)
}

/// Back to the reference space: `ρ = l Ρ l^{-1}`.
pub fn unlift_density(p: &DensityMorphism, frames: &FrameField, path: &Path) -> Result<ComplexMatrix> {
    require_path(path, p.path_id())?;
    let l = frames.frame(path, p.time(), p.matrix().dim())?;
    Ok(p.matrix().conjugate_by(&l))
}

/// `Σ p_i Ψ_i Ψ_i^‡ / <Ψ_i|Ψ_i>` directly in fibre coordinates.
pub fn density_morphism_from_ensemble(
    sections: &[(f64, StateSection)],
    path: &Path,
    t: f64,
    tol: &Tolerance,
) -> Result<DensityMorphism> {
    for (_, s) in sections {
        require_path(path, s.path.id())?;
    }
    let values: Vec<(f64, Vec<C64>)> = sections
        .iter()
        .map(|(w, s)| s.value(t).map(|v| (*w, v)))
        .collect::<Result<_>>()?;
    let dim = validate_weighted(values.iter().map(|(w, v)| (*w, v.as_slice())), tol)?;
    let matrix = weighted_projector_sum(dim, values.iter().map(|(w, v)| (*w, v.as_slice())));
    Ok(DensityMorphism(MorphismValue {
        path_id: path.id().to_string(),
        time: t,
        matrix,
    }))
}

/// Bundle mean value `Tr(Ρ A)` of a lifted observable.
pub fn bundle_expectation(p: &DensityMorphism, a: &MorphismValue) -> Result<f64> {
    if p.path_id() != a.path_id || !same_time(p.time(), a.time) {
        return Err(BqmError::contract(format!(
            "density morphism on `{}` at {} paired with a morphism on `{}` at {}",
            p.path_id(),
            p.time(),
            a.path_id,
            a.time
        )));
    }
    p.matrix().ensure_same_dim(&a.matrix)?;
    Ok((p.matrix() * &a.matrix).trace().re)
}

/// `Ρ(t) = T Ρ(t0) T^{-1}`.
pub fn propagate_density_morphism(p0: &DensityMorphism, transport: &EvolutionTransport) -> Result<DensityMorphism> {
    if p0.path_id() != transport.path_id {
        return Err(BqmError::contract(format!(
            "density morphism on `{}` but transport along `{}`",
            p0.path_id(),
            transport.path_id
        )));
    }
    if !same_time(p0.time(), transport.t_from) {
        return Err(BqmError::contract(format!(
            "density morphism at {} but transport starts at {}",
            p0.time(),
            transport.t_from
        )));
    }
    p0.matrix().ensure_same_dim(&transport.matrix)?;
    Ok(DensityMorphism(MorphismValue {
        path_id: p0.path_id().to_string(),
        time: transport.t_to,
        matrix: p0.matrix().conjugate_by(&transport.matrix),
    }))
}

fn require_path(path: &Path, id: &str) -> Result<()> {
    if path.id() != id {
        return Err(BqmError::contract(format!("expected path `{}`, got `{id}`", path.id())));
    }
    Ok(())
}

/// Everything needed to evaluate the transport coefficients along one path.
#[derive(Clone, Debug)]
pub struct Connection {
    pub hamiltonian: HamiltonianFamily,
    pub frames: FrameField,
    pub path: Path,
    pub cfg: PhysicsConfig,
    /// Central-difference step for the transport generator.
    pub fd_step: f64,
    sign: f64,
}

impl Connection {
    pub fn new(hamiltonian: HamiltonianFamily, frames: FrameField, path: Path, cfg: PhysicsConfig) -> Self {
        Connection {
            hamiltonian,
            frames,
            path,
            cfg,
            fd_step: 1e-4,
            sign: 1.0,
        }
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Self {
        self.fd_step = fd_step;
        self
    }

    /// Mutation hook: reports `-Γ` instead of `Γ`. Used to check that the
    /// invariant suite notices a wrong sign convention.
    #[doc(hidden)]
    pub fn with_flipped_sign(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Transport between nearby times from a single step propagator.
    pub fn short_transport(&self, t_to: f64, t_from: f64) -> Result<ComplexMatrix> {
        let dim = self.dim();
        let u = step_propagator(&self.hamiltonian, t_from, t_to, &self.cfg)?;
        let l_to = self.frames.frame(&self.path, t_to, dim)?;
        let l_from = self.frames.frame(&self.path, t_from, dim)?;
        Ok(&(&l_to.adjoint() * &u) * &l_from)
    }

    /// `Γ(t) = -∂_t T(t, s)|_{s=t}` by central differences.
    pub fn coefficients(&self, t: f64) -> Result<TransportCoefficients> {
        let h = self.fd_step;
        if !(h.is_finite() && h > 0.0) {
            return Err(BqmError::contract(format!("fd_step must be positive, got {h}")));
        }
        let inside = self.path.domain().contains_with_margin(t, h)
            && self.hamiltonian.domain().contains_with_margin(t, h);
        if !inside {
            return Err(BqmError::contract(format!(
                "transport coefficients at t = {t} need t ± {h} inside the path and Hamiltonian domains"
            )));
        }
        let forward = self.short_transport(t + h, t)?;
        let backward = self.short_transport(t - h, t)?;
        let gamma = (&forward - &backward).scale_real(-self.sign / (2.0 * h));
        Ok(TransportCoefficients {
            path_id: self.path.id().to_string(),
            time: t,
            gamma,
        })
    }

    /// `H^m(t) = -i hbar Γ(t)`.
    pub fn matrix_hamiltonian(&self, t: f64) -> Result<ComplexMatrix> {
        Ok(self.coefficients(t)?.matrix_hamiltonian(self.cfg.hbar))
    }
}

/// Transport coefficients of the evolution transport along `path` at `t`.
pub fn transport_coefficients(
    h: &HamiltonianFamily,
    frames: &FrameField,
    path: &Path,
    t: f64,
    fd_step: f64,
    cfg: &PhysicsConfig,
) -> Result<TransportCoefficients> {
    Connection::new(h.clone(), frames.clone(), path.clone(), *cfg)
        .with_fd_step(fd_step)
        .coefficients(t)
}

/// Derivation along the path of a morphism family: `dC/dt + [Γ(t), C(t)]`.
pub fn morphism_derivation(
    c: impl Fn(f64) -> Result<MorphismValue>,
    gamma: impl Fn(f64) -> Result<TransportCoefficients>,
    t: f64,
    fd_step: f64,
) -> Result<ComplexMatrix> {
    let plus = c(t + fd_step)?;
    let minus = c(t - fd_step)?;
    let here = c(t)?;
    let g = gamma(t)?;
    let derivative = (&plus.matrix - &minus.matrix).scale_real(1.0 / (2.0 * fd_step));
    Ok(&derivative + &commutator(&g.gamma, &here.matrix)?)
}

/// Integrates `i hbar dΡ/dt = [H^m(t), Ρ]` along the connection's path.
pub fn integrate_bundle_liouville(
    p0: &DensityMorphism,
    conn: &Connection,
    grid: &TimeGrid,
) -> Result<Vec<DensityMorphism>> {
    require_path(&conn.path, p0.path_id())?;
    if !same_time(p0.time(), grid.t0) {
        return Err(BqmError::contract(format!(
            "initial density morphism is at {} but the grid starts at {}",
            p0.time(),
            grid.t0
        )));
    }
    p0.matrix().ensure_same_dim(&ComplexMatrix::identity(conn.dim()))?;
    let traj = integrate_liouville(p0.matrix(), |t| conn.matrix_hamiltonian(t), grid, conn.cfg.hbar)?;
    Ok(traj
        .into_iter()
        .enumerate()
        .map(|(k, matrix)| {
            DensityMorphism(MorphismValue {
                path_id: conn.path.id().to_string(),
                time: grid.time(k),
                matrix,
            })
        })
        .collect())
}

/// Which of the three transport equations hold on a grid, with the maximal
/// residual of each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionSystemReport {
    /// `D Ψ = 0`.
    pub section_transported: bool,
    /// `D (Ρ Ψ) = 0`.
    pub product_transported: bool,
    /// `i hbar dΡ/dt = [H^m, Ρ]`, checked as `D̃ Ρ = 0`.
    pub density_equation: bool,
    pub section_residual: f64,
    pub product_residual: f64,
    pub density_residual: f64,
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn vec_combine(a: &[C64], b: &[C64], fb: f64) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y * fb).collect()
}

/// Evaluates `D Ψ`, `D(Ρ Ψ)` and `D̃ Ρ` at every grid point. Any two of the
/// three vanishing forces the third to vanish.
pub fn check_transport_section_system(
    section: &StateSection,
    density: impl Fn(f64) -> Result<DensityMorphism>,
    conn: &Connection,
    grid: &TimeGrid,
    threshold: f64,
) -> Result<SectionSystemReport> {
    let h = conn.fd_step;
    let mut res = [0.0f64; 3];
    for t in grid.times() {
        let gamma = conn.coefficients(t)?.gamma;
        let psi = section.value(t)?;
        let (psi_p, psi_m) = (section.value(t + h)?, section.value(t - h)?);
        let dpsi = vec_combine(&psi_p, &psi_m, -1.0);
        let gpsi = gamma.apply(&psi);
        let d_section: Vec<C64> = dpsi.iter().zip(&gpsi).map(|(d, g)| d / (2.0 * h) + g).collect();
        res[0] = res[0].max(vec_norm(&d_section));

        let (rho, rho_p, rho_m) = (density(t)?, density(t + h)?, density(t - h)?);
        let prod = |r: &DensityMorphism, v: &[C64]| r.matrix().apply(v);
        let dprod = vec_combine(&prod(&rho_p, &psi_p), &prod(&rho_m, &psi_m), -1.0);
        let gprod = gamma.apply(&prod(&rho, &psi));
        let d_product: Vec<C64> = dprod.iter().zip(&gprod).map(|(d, g)| d / (2.0 * h) + g).collect();
        res[1] = res[1].max(vec_norm(&d_product));

        let drho = (rho_p.matrix() - rho_m.matrix()).scale_real(1.0 / (2.0 * h));
        let d_density = &drho + &commutator(&gamma, rho.matrix())?;
        res[2] = res[2].max(d_density.frobenius_norm());
    }
    Ok(SectionSystemReport {
        section_transported: res[0] <= threshold,
        product_transported: res[1] <= threshold,
        density_equation: res[2] <= threshold,
        section_residual: res[0],
        product_residual: res[1],
        density_residual: res[2],
    })
}
