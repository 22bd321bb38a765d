use std::sync::Arc;

use super::config::{FrameSpec, PictureSpec, ScenarioConfig};
use super::report::{InvariantReport, MaxTracker, ObservableMeans, TraceRow, TraceTable};
use crate::bundle::{
    density_morphism, evolution_transport, integrate_bundle_liouville, Connection, DensityMorphism, FrameField, Path,
};
use crate::error::Result;
use crate::hilbert::{
    density_from_ensemble, integrate_von_neumann, HamiltonianFamily, PhysicsConfig, PropagatorLattice,
};
use crate::linalg::{hermitian_eigensystem, ComplexMatrix, Tolerance};
use crate::pictures::{mean_chains, MeanInstance, PictureFamily};

/// Lattice cells per unit time: at least 256 and at least two per grid step,
/// capped to keep the lattice below half a million cells.
fn lattice_density(cfg: &ScenarioConfig) -> f64 {
    let per_step = 2.0 * cfg.grid.steps as f64 / (cfg.grid.t1 - cfg.grid.t0);
    let cap = 500_000.0 / cfg.domain().length();
    per_step.max(256.0).min(cap)
}

/// Everything derived from a config that the runners share.
pub(crate) struct Setup {
    pub(crate) hamiltonian: HamiltonianFamily,
    pub(crate) physics: PhysicsConfig,
    pub(crate) lattice: Arc<PropagatorLattice>,
    pub(crate) path: Path,
    pub(crate) frames: FrameField,
    pub(crate) picture: PictureFamily,
}

pub(crate) fn setup(cfg: &ScenarioConfig) -> Result<Setup> {
    let domain = cfg.domain();
    let hamiltonian = cfg.hamiltonian.family(domain, &cfg.input_tolerance)?;
    let physics = PhysicsConfig::new(cfg.hbar)?;
    let lattice = Arc::new(PropagatorLattice::new(&hamiltonian, &physics, lattice_density(cfg))?);
    let frames = match &cfg.frames {
        FrameSpec::Identity => FrameField::identity(),
        FrameSpec::RandomUnitary { seed } => FrameField::random_smooth(*seed),
        FrameSpec::CoMoving { t_ref } => FrameField::co_moving(lattice.clone(), *t_ref),
        FrameSpec::DiagonalPhase { phases, rate } => FrameField::diagonal_phase(phases.clone(), *rate),
    };
    let picture = match &cfg.picture {
        PictureSpec::Schrodinger => PictureFamily::identity(cfg.dim, cfg.grid.t0),
        PictureSpec::Heisenberg { anchor } => PictureFamily::evolution(lattice.clone(), *anchor)?,
        PictureSpec::VFamily { anchor, phases, omega } => PictureFamily::diagonal_phase(phases.clone(), *omega, *anchor)?,
    };
    Ok(Setup {
        hamiltonian,
        physics,
        lattice,
        path: Path::worldline("gamma", domain),
        frames,
        picture,
    })
}

fn real_trace(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a * b).trace().re
}

/// Runs a scenario: closed-form and integrated evolution on both sides, the
/// mean-value chains, and the invariant checks.
pub fn run_evolve(cfg: &ScenarioConfig) -> Result<(TraceTable, InvariantReport)> {
    run(cfg).map_err(|e| e.with_context(&format!("scenario `{}`", cfg.name)))
}

fn run(cfg: &ScenarioConfig) -> Result<(TraceTable, InvariantReport)> {
    let s = setup(cfg)?;
    let grid = &cfg.grid;
    let t0 = grid.t0;
    let tol = &cfg.input_tolerance;
    let thr = &cfg.tolerances;

    let rho0 = density_from_ensemble(&cfg.ensemble, t0, tol)?;
    let p0 = density_morphism(&rho0, &s.frames, &s.path)?;
    let purity0 = real_trace(&rho0.rho, &rho0.rho);

    let hilbert_rk4 = integrate_von_neumann(&rho0, &s.hamiltonian, grid, &s.physics)?;
    let conn = Connection::new(s.hamiltonian.clone(), s.frames.clone(), s.path.clone(), s.physics);
    let bundle_rk4 = integrate_bundle_liouville(&p0, &conn, grid)?;

    let mut checks = MaxTracker::default();
    let mut rows = Vec::with_capacity(grid.steps + 1);
    let eig_tol = Tolerance::default().scaled(1e3);
    for k in 0..=grid.steps {
        let t = grid.time(k);
        let u = s.lattice.propagator(t, t0)?;
        let rho = rho0.rho.conjugate_by(&u.matrix);
        let transport = evolution_transport(&s.lattice, &s.frames, &s.path, t, t0)?;
        let p = DensityMorphism(crate::bundle::MorphismValue {
            path_id: s.path.id().to_string(),
            time: t,
            matrix: p0.matrix().conjugate_by(&transport.matrix),
        });
        let l = s.frames.frame(&s.path, t, cfg.dim)?;

        let trace = rho.trace();
        let purity = real_trace(&rho, &rho);
        let min_eig = hermitian_eigensystem(&rho.hermitian_part(), &eig_tol)?.min();
        checks.record("trace_preservation", thr.trace, (trace - 1.0).norm());
        checks.record("positivity", thr.positivity, (-min_eig).max(0.0));
        checks.record("hermiticity", thr.hermiticity, rho.hermiticity_residual());
        checks.record("purity_drift", thr.purity_drift, (purity - purity0).abs());

        let mut gap_formulation = p.matrix().conjugate_by(&l).distance(&rho);
        let mut gap_picture: f64 = 0.0;
        let mut means = Vec::with_capacity(cfg.observables.len());
        for (_, a) in &cfg.observables {
            let m = ObservableMeans {
                schrodinger: real_trace(&rho, a),
                heisenberg: real_trace(&rho0.rho, &a.conjugate_by_adjoint(&u.matrix)),
                bundle: real_trace(p.matrix(), &a.conjugate_by_adjoint(&l)),
            };
            gap_formulation = gap_formulation.max((m.schrodinger - m.bundle).abs());
            let chains = mean_chains(&MeanInstance {
                rho0: rho0.clone(),
                observable: a.clone(),
                propagator: u.clone(),
                picture: s.picture.clone(),
                frames: s.frames.clone(),
                path: s.path.clone(),
            })?;
            gap_picture = gap_picture.max(chains.max_deviation);
            means.push(m);
        }

        let hilbert_gap = hilbert_rk4[k].rho.distance(&rho);
        let bundle_gap = bundle_rk4[k].matrix().distance(p.matrix());
        let heis_hilbert = hilbert_rk4[k].rho.conjugate_by_adjoint(&u.matrix).distance(&rho0.rho);
        let heis_bundle = bundle_rk4[k].matrix().conjugate_by_adjoint(&transport.matrix).distance(p0.matrix());
        let gap_heisenberg_const = heis_hilbert.max(heis_bundle);

        checks.record("formulation_gap", thr.formulation, gap_formulation);
        checks.record("picture_gap", thr.picture, gap_picture);
        checks.record("heisenberg_constancy", thr.heisenberg_constancy, gap_heisenberg_const);
        checks.record("integrator_hilbert", thr.integrator, hilbert_gap);
        checks.record("integrator_bundle", thr.integrator, bundle_gap);

        rows.push(TraceRow {
            t,
            trace_re: trace.re,
            trace_im: trace.im,
            purity,
            min_eig,
            means,
            gap_formulation,
            gap_picture,
            gap_heisenberg_const,
        });
    }
    let table = TraceTable {
        observables: cfg.observables.iter().map(|(n, _)| n.clone()).collect(),
        rows,
    };
    Ok((table, checks.into_report(cfg.name.clone())))
}
