//! Pictures of motion: Schrödinger, Heisenberg and general `V`-pictures for
//! operators, morphisms and densities.
//!
//! A [`PictureFamily`] is a unitary-valued `V(t1, t)` with a fixed anchor
//! `t1`. Operators and densities move into the `V`-picture by conjugation
//! with `V(t1, t)`; on the bundle side the same family acts through the
//! frames as `l(t1)^{-1} V(t1, t) l(t)`.

use std::fmt;
use std::sync::Arc;

use crate::bundle::{EvolutionTransport, FrameField, MorphismValue, Path};
use crate::error::{BqmError, Result};
use crate::hilbert::{
    integrate_liouville, DensityState, HamiltonianFamily, PhysicsConfig, Propagator, PropagatorLattice, TimeGrid,
};
use crate::linalg::{commutator, ComplexMatrix, Tolerance, C64, I};


type PictureEvaluator = dyn Fn(f64, f64) -> Result<ComplexMatrix> + Send + Sync;

/// Default central-difference step for `dV/dt`.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// `V(t1, t)` with anchor `t1`.
#[derive(Clone)]
pub struct PictureFamily {
    label: String,
    dim: usize,
    anchor: f64,
    fd_step: f64,
    identity: bool,
    evaluator: Arc<PictureEvaluator>,
}

impl fmt::Debug for PictureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PictureFamily({}, t1={})", self.label, self.anchor)
    }
}

impl PictureFamily {
    /// Wraps an evaluator `(t1, t) -> V(t1, t)`. Checks that `V(t1, t1)` is the
    /// identity.
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        anchor: f64,
        evaluator: impl Fn(f64, f64) -> Result<ComplexMatrix> + Send + Sync + 'static,
        tol: &Tolerance,
    ) -> Result<Self> {
        let family = PictureFamily {
            label: label.into(),
            dim,
            anchor,
            fd_step: DEFAULT_FD_STEP,
            identity: false,
            evaluator: Arc::new(evaluator),
        };
        let at_anchor = family.at(anchor)?;
        let gap = at_anchor.distance(&ComplexMatrix::identity(dim));
        if !tol.accepts(gap, (dim as f64).sqrt()) {
            return Err(BqmError::contract(format!(
                "picture `{}` has V(t1, t1) != I (distance {gap:e})",
                family.label
            )));
        }
        Ok(family)
    }

    /// The Schrödinger picture.
    pub fn identity(dim: usize, anchor: f64) -> Self {
        PictureFamily {
            label: "schrodinger".into(),
            dim,
            anchor,
            fd_step: DEFAULT_FD_STEP,
            identity: true,
            evaluator: Arc::new(move |_, _| Ok(ComplexMatrix::identity(dim))),
        }
    }

    /// Heisenberg picture: `V(t1, t) = U(t1, t)`.
    pub fn evolution(lattice: Arc<PropagatorLattice>, anchor: f64) -> Result<Self> {
        let dim = lattice.hamiltonian().dim();
        lattice.hamiltonian().require_in_domain(anchor, "picture anchor")?;
        Ok(PictureFamily {
            label: "heisenberg".into(),
            dim,
            anchor,
            fd_step: DEFAULT_FD_STEP,
            identity: false,
            evaluator: Arc::new(move |t1, t| Ok(lattice.propagator(t1, t)?.matrix)),
        })
    }

    /// Rotating frame `V(t1, t) = exp(-i omega (t - t1) D)`, `D = diag(phases)`.
    pub fn diagonal_phase(phases: Vec<f64>, omega: f64, anchor: f64) -> Result<Self> {
        if phases.is_empty() || phases.iter().chain([&omega, &anchor]).any(|x| !x.is_finite()) {
            return Err(BqmError::contract("diagonal phase picture needs finite, non-empty parameters"));
        }
        let dim = phases.len();
        Ok(PictureFamily {
            label: format!("diagonal-phase(omega={omega})"),
            dim,
            anchor,
            fd_step: DEFAULT_FD_STEP,
            identity: false,
            evaluator: Arc::new(move |t1, t| {
                let d: Vec<C64> = phases.iter().map(|p| (-I * (omega * (t - t1) * p)).exp()).collect();
                Ok(ComplexMatrix::diagonal(&d))
            }),
        })
    }

    pub fn with_fd_step(mut self, fd_step: f64) -> Self {
        self.fd_step = fd_step;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// `V(t1, t)`, checked for shape and unitarity.
    pub fn at(&self, t: f64) -> Result<ComplexMatrix> {
        let v = (self.evaluator)(self.anchor, t)?;
        if v.dim() != self.dim {
            return Err(BqmError::Shape {
                expected: self.dim,
                found: v.dim(),
            });
        }
        if !v.is_unitary(&Tolerance::default().scaled(100.0)) {
            return Err(BqmError::contract(format!(
                "picture `{}` is not unitary at t = {t} (residual {:e})",
                self.label,
                v.unitarity_residual()
            )));
        }
        Ok(v)
    }

    /// `dV(t1, t)/dt` by central differences.
    pub fn derivative(&self, t: f64, fd_step: f64) -> Result<ComplexMatrix> {
        if !(fd_step.is_finite() && fd_step > 0.0) {
            return Err(BqmError::contract(format!("fd_step must be positive, got {fd_step}")));
        }
        if self.identity {
            return Ok(ComplexMatrix::zeros(self.dim));
        }
        let plus = self.at(t + fd_step)?;
        let minus = self.at(t - fd_step)?;
        Ok((&plus - &minus).scale_real(0.5 / fd_step))
    }
}

/// `U^{-1} A U` with `U = U(t, t0)`.
pub fn to_heisenberg_operator(a: &ComplexMatrix, u: &Propagator) -> Result<ComplexMatrix> {
    a.ensure_same_dim(&u.matrix)?;
    Ok(a.conjugate_by_adjoint(&u.matrix))
}

/// `T^{-1}(t, t0) A(t) T(t, t0)`, a morphism in the fibre at `t0`.
pub fn to_heisenberg_morphism(a: &MorphismValue, transport: &EvolutionTransport) -> Result<MorphismValue> {
    if a.path_id != transport.path_id {
        return Err(BqmError::contract(format!(
            "morphism on path `{}` cannot use a transport along `{}`",
            a.path_id, transport.path_id
        )));
    }
    if !same_time(a.time, transport.t_to) {
        return Err(BqmError::contract(format!(
            "morphism at t = {} but transport ends at {}",
            a.time, transport.t_to
        )));
    }
    a.matrix.ensure_same_dim(&transport.matrix)?;
    Ok(MorphismValue {
        path_id: a.path_id.clone(),
        time: transport.t_from,
        matrix: a.matrix.conjugate_by_adjoint(&transport.matrix),
    })
}

/// Largest deviation of a Heisenberg-picture density from its initial value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstancyReport {
    pub max_deviation: f64,
    pub worst_time: f64,
}

fn constancy<'a>(
    samples: impl Iterator<Item = (f64, &'a ComplexMatrix)>,
    mut pulled_back: impl FnMut(f64, &ComplexMatrix) -> Result<ComplexMatrix>,
    initial: &ComplexMatrix,
    t0: f64,
) -> Result<ConstancyReport> {
    let mut report = ConstancyReport {
        max_deviation: 0.0,
        worst_time: t0,
    };
    for (t, m) in samples {
        let gap = pulled_back(t, m)?.distance(initial);
        if gap > report.max_deviation {
            report = ConstancyReport {
                max_deviation: gap,
                worst_time: t,
            };
        }
    }
    Ok(report)
}

/// `max_t ||U^{-1}(t, t0) ρ(t) U(t, t0) - ρ(t0)||` with `t0` the first sample.
///
/// `propagator(t, t0)` supplies `U(t, t0)`.
pub fn heisenberg_density(
    traj: &[DensityState],
    propagator: impl Fn(f64, f64) -> Result<Propagator>,
) -> Result<ConstancyReport> {
    let Some(first) = traj.first() else {
        return Ok(ConstancyReport {
            max_deviation: 0.0,
            worst_time: 0.0,
        });
    };
    let t0 = first.time;
    constancy(
        traj.iter().map(|s| (s.time, &s.rho)),
        |t, rho| to_heisenberg_operator(rho, &propagator(t, t0)?),
        &first.rho,
        t0,
    )
}

/// Bundle-side counterpart of [`heisenberg_density`]; `transport(t, t0)`
/// supplies the evolution transport.
pub fn heisenberg_density_morphism(
    traj: &[crate::bundle::DensityMorphism],
    transport: impl Fn(f64, f64) -> Result<EvolutionTransport>,
) -> Result<ConstancyReport> {
    let Some(first) = traj.first() else {
        return Ok(ConstancyReport {
            max_deviation: 0.0,
            worst_time: 0.0,
        });
    };
    let t0 = first.time();
    let path_id = first.path_id().to_string();
    constancy(
        traj.iter().map(|p| (p.time(), p.matrix())),
        |t, m| {
            let value = MorphismValue {
                path_id: path_id.clone(),
                time: t,
                matrix: m.clone(),
            };
            Ok(to_heisenberg_morphism(&value, &transport(t, t0)?)?.matrix)
        },
        first.matrix(),
        t0,
    )
}

/// Largest residual of `i hbar dA^H/dt = [A^H, H^H] + i hbar (dA/dt)^H` over
/// `times`, all derivatives by central differences of step `fd_step`.
pub fn heisenberg_observable_rhs_check(
    a: impl Fn(f64) -> ComplexMatrix,
    lattice: &PropagatorLattice,
    t0: f64,
    times: &[f64],
    fd_step: f64,
) -> Result<f64> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(BqmError::contract(format!("fd_step must be positive, got {fd_step}")));
    }
    let hbar = lattice.config().hbar;
    let heis = |t: f64, m: &ComplexMatrix| -> Result<ComplexMatrix> {
        to_heisenberg_operator(m, &lattice.propagator(t, t0)?)
    };
    let mut worst: f64 = 0.0;
    for &t in times {
        let (tp, tm) = (t + fd_step, t - fd_step);
        let dah = (&heis(tp, &a(tp))? - &heis(tm, &a(tm))?).scale_real(0.5 / fd_step);
        let da = (&a(tp) - &a(tm)).scale_real(0.5 / fd_step);
        let lhs = dah.scale(I * hbar);
        let ah = heis(t, &a(t))?;
        let hh = heis(t, &lattice.hamiltonian().at(t))?;
        let rhs = &commutator(&ah, &hh)? + &heis(t, &da)?.scale(I * hbar);
        worst = worst.max(lhs.distance(&rhs));
    }
    Ok(worst)
}

/// `V(t1, t) A V^{-1}(t1, t)`.
pub fn v_transform_operator(a: &ComplexMatrix, v: &PictureFamily, t: f64) -> Result<ComplexMatrix> {
    let vm = v.at(t)?;
    a.ensure_same_dim(&vm)?;
    Ok(a.conjugate_by(&vm))
}

/// `V_γ(t1, t) = l(t1)^{-1} V(t1, t) l(t)`, mapping the fibre at `γ(t)` to
/// the fibre at `γ(t1)`.
pub fn bundle_picture_map(v: &PictureFamily, frames: &FrameField, path: &Path, t: f64) -> Result<ComplexMatrix> {
    let l1 = frames.frame(path, v.anchor(), v.dim())?;
    let lt = frames.frame(path, t, v.dim())?;
    Ok(&(&l1.adjoint() * &v.at(t)?) * &lt)
}

/// `V_γ(t1, t) A_γ(t) V_γ^{-1}(t1, t)`, a morphism in the fibre at `t1`.
pub fn v_transform_morphism(
    a: &MorphismValue,
    v: &PictureFamily,
    frames: &FrameField,
    path: &Path,
) -> Result<MorphismValue> {
    if a.path_id != path.id() {
        return Err(BqmError::contract(format!(
            "morphism on path `{}` transformed along `{}`",
            a.path_id,
            path.id()
        )));
    }
    let vg = bundle_picture_map(v, frames, path, a.time)?;
    a.matrix.ensure_same_dim(&vg)?;
    Ok(MorphismValue {
        path_id: a.path_id.clone(),
        time: v.anchor(),
        matrix: a.matrix.conjugate_by(&vg),
    })
}

/// Generator of the density in the `V`-picture.
#[derive(Clone, Debug, PartialEq)]
pub struct PictureGenerator {
    pub matrix: ComplexMatrix,
    pub time: f64,
    pub anchor: f64,
}

/// `H~(t) = V H(t) V^{-1} + i hbar (dV/dt) V^{-1}` with `V = V(t1, t)`.
pub fn v_picture_generator(
    v: &PictureFamily,
    h: &HamiltonianFamily,
    t: f64,
    fd_step: f64,
    cfg: &PhysicsConfig,
) -> Result<PictureGenerator> {
    h.require_in_domain(t, "picture generator")?;
    let vm = v.at(t)?;
    let ht = h.at(t);
    ht.ensure_same_dim(&vm)?;
    let dv = v.derivative(t, fd_step)?;
    let matrix = &ht.conjugate_by(&vm) + &(&dv * &vm.adjoint()).scale(I * cfg.hbar);
    Ok(PictureGenerator {
        matrix,
        time: t,
        anchor: v.anchor(),
    })
}

/// Integrates `i hbar dρ^V/dt = [H~(t), ρ^V]` from `rho0_v` at `grid.t0`.
pub fn integrate_v_picture_density(
    rho0_v: &DensityState,
    v: &PictureFamily,
    h: &HamiltonianFamily,
    grid: &TimeGrid,
    cfg: &PhysicsConfig,
) -> Result<Vec<DensityState>> {
    h.require_in_domain(grid.t0, "grid start")?;
    h.require_in_domain(grid.t1, "grid end")?;
    if !same_time(rho0_v.time, grid.t0) {
        return Err(BqmError::contract(format!(
            "initial density is at t = {} but the grid starts at {}",
            rho0_v.time, grid.t0
        )));
    }
    rho0_v.rho.ensure_same_dim(&h.at(grid.t0))?;
    let fd = v.fd_step();
    let traj = integrate_liouville(
        &rho0_v.rho,
        |t| Ok(v_picture_generator(v, h, t, fd, cfg)?.matrix),
        grid,
        cfg.hbar,
    )?;
    Ok(traj
        .into_iter()
        .enumerate()
        .map(|(k, rho)| DensityState {
            rho,
            time: grid.time(k),
        })
        .collect())
}

/// `U^V(t, t1, t0) = V(t1, t) U(t, t0) V^{-1}(t1, t0)`.
pub fn v_picture_propagator(v: &PictureFamily, u: &Propagator) -> Result<Propagator> {
    let vt = v.at(u.t_to)?;
    let v0 = v.at(u.t_from)?;
    u.matrix.ensure_same_dim(&vt)?;
    Ok(Propagator {
        matrix: &(&vt * &u.matrix) * &v0.adjoint(),
        t_from: u.t_from,
        t_to: u.t_to,
    })
}

/// `ρ^V(t) = U^V(t, t1, t0) ρ^V(t0) U^V(t, t1, t0)^{-1}`.
pub fn v_picture_solution(
    rho_t0_v: &DensityState,
    v: &PictureFamily,
    lattice: &PropagatorLattice,
    t: f64,
) -> Result<DensityState> {
    let u = lattice.propagator(t, rho_t0_v.time)?;
    let uv = v_picture_propagator(v, &u)?;
    rho_t0_v.rho.ensure_same_dim(&uv.matrix)?;
    Ok(DensityState {
        rho: rho_t0_v.rho.conjugate_by(&uv.matrix),
        time: t,
    })
}

/// Largest residual of `i hbar dρ^V/dt - [H~, ρ^V]` along the exact
/// trajectory `ρ^V(t) = V(t1, t) U(t, t0) ρ0 U^{-1}(t, t0) V^{-1}(t1, t)`.
pub fn v_picture_residual(
    rho0: &DensityState,
    v: &PictureFamily,
    lattice: &PropagatorLattice,
    times: &[f64],
    fd_step: f64,
) -> Result<f64> {
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(BqmError::contract(format!("fd_step must be positive, got {fd_step}")));
    }
    let cfg = lattice.config();
    let rho_v = |t: f64| -> Result<ComplexMatrix> {
        let rho = rho0.rho.conjugate_by(&lattice.propagator(t, rho0.time)?.matrix);
        v_transform_operator(&rho, v, t)
    };
    let mut worst: f64 = 0.0;
    for &t in times {
        let d = (&rho_v(t + fd_step)? - &rho_v(t - fd_step)?).scale_real(0.5 / fd_step);
        let g = v_picture_generator(v, lattice.hamiltonian(), t, fd_step, cfg)?;
        let residual = &d.scale(I * cfg.hbar) - &commutator(&g.matrix, &rho_v(t)?)?;
        worst = worst.max(residual.frobenius_norm());
    }
    Ok(worst)
}

/// One consistent tuple for the mean-value chains.
#[derive(Clone, Debug)]
pub struct MeanInstance {
    /// Density at `t0`.
    pub rho0: DensityState,
    /// Observable `A(t)` at the final time.
    pub observable: ComplexMatrix,
    /// `U(t, t0)`.
    pub propagator: Propagator,
    pub picture: PictureFamily,
    pub frames: FrameField,
    pub path: Path,
}

/// The four Heisenberg-chain means and the four `V`-chain means, ordered
/// bundle-picture, Hilbert-picture, bundle-Schrödinger, Hilbert-Schrödinger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanChains {
    pub heisenberg: [C64; 4],
    pub v_picture: [C64; 4],
    pub max_deviation: f64,
}

fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    (a * b).trace()
}

pub fn mean_chains(inst: &MeanInstance) -> Result<MeanChains> {
    let u = &inst.propagator;
    if !same_time(inst.rho0.time, u.t_from) {
        return Err(BqmError::contract(format!(
            "density at {} but the propagator starts at {}",
            inst.rho0.time, u.t_from
        )));
    }
    let (t0, t) = (u.t_from, u.t_to);
    let dim = inst.rho0.dim();
    let a = &inst.observable;
    a.ensure_same_dim(&u.matrix)?;
    let l0 = inst.frames.frame(&inst.path, t0, dim)?;
    let lt = inst.frames.frame(&inst.path, t, dim)?;

    let rho_t = inst.rho0.rho.conjugate_by(&u.matrix);
    let big_rho0 = inst.rho0.rho.conjugate_by_adjoint(&l0);
    let big_rho_t = rho_t.conjugate_by_adjoint(&lt);
    let a_lift = a.conjugate_by_adjoint(&lt);
    let transport = &(&lt.adjoint() * &u.matrix) * &l0;

    let schrodinger_bundle = trace_product(&big_rho_t, &a_lift);
    let schrodinger_hilbert = trace_product(&rho_t, a);
    let heisenberg = [
        trace_product(&big_rho0, &a_lift.conjugate_by_adjoint(&transport)),
        trace_product(&inst.rho0.rho, &a.conjugate_by_adjoint(&u.matrix)),
        schrodinger_bundle,
        schrodinger_hilbert,
    ];

    let vm = inst.picture.at(t)?;
    let vg = bundle_picture_map(&inst.picture, &inst.frames, &inst.path, t)?;
    let v_picture = [
        trace_product(&big_rho_t.conjugate_by(&vg), &a_lift.conjugate_by(&vg)),
        trace_product(&rho_t.conjugate_by(&vm), &a.conjugate_by(&vm)),
        schrodinger_bundle,
        schrodinger_hilbert,
    ];

    let mut max_deviation: f64 = 0.0;
    for chain in [&heisenberg, &v_picture] {
        for i in 0..4 {
            for j in i + 1..4 {
                max_deviation = max_deviation.max((chain[i] - chain[j]).norm());
            }
        }
    }
    max_deviation = max_deviation.max((heisenberg[0] - v_picture[0]).norm());
    Ok(MeanChains {
        heisenberg,
        v_picture,
        max_deviation,
    })
}

/// Largest pairwise deviation within the mean chains over all instances.
pub fn picture_mean_invariance(instances: &[MeanInstance]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for inst in instances {
        worst = worst.max(mean_chains(inst)?.max_deviation);
    }
    Ok(worst)
}
