use std::sync::Arc;

use rand::Rng;

use super::report::{InvariantReport, MaxTracker};
use crate::bundle::{
    bundle_expectation, check_transport_section_system, density_morphism, evolution_transport,
    integrate_bundle_liouville, lift_operator, morphism_derivation, propagate_density_morphism, transport_coefficients,
    Connection, DensityMorphism, FrameField, Path, StateSection,
};
use crate::curvature::{curvature_commutator, curvature_commutator_in_frame, curvature_fd, flat_frame, TwoParamFamily};
use crate::error::{BqmError, Result};
use crate::hilbert::{
    density_from_ensemble, evolution_operator, integrate_von_neumann, propagate_density, DensityState, Ensemble,
    EnsembleMember, HamiltonianFamily, Interval, PhysicsConfig, PropagatorLattice, StateVector, TimeGrid,
};
use crate::linalg::{commutator, hermitian_eigensystem, ComplexMatrix, Tolerance};
use crate::pictures::{
    heisenberg_density, mean_chains, to_heisenberg_morphism, to_heisenberg_operator, v_picture_residual,
    v_picture_solution, v_transform_morphism, v_transform_operator, MeanInstance, PictureFamily,
};
use crate::random::{ginibre, random_hermitian, random_vector, random_weights, rng_for, SeededRng};

/// Test hooks for the verification sweep.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Report `-Γ` from every connection, as a mutation canary.
    pub flip_gamma_sign: bool,
}

const DIM_RANGE: std::ops::RangeInclusive<usize> = 2..=16;

/// Randomized sweep over the invariants of every module.
pub fn run_verify(seed: u64, trials: usize, dims: &[usize]) -> Result<InvariantReport> {
    run_verify_with(seed, trials, dims, &VerifyOptions::default())
}

pub fn run_verify_with(seed: u64, trials: usize, dims: &[usize], opts: &VerifyOptions) -> Result<InvariantReport> {
    if trials == 0 {
        return Err(BqmError::contract("verify needs at least one trial"));
    }
    if dims.is_empty() {
        return Err(BqmError::contract("verify needs at least one dimension"));
    }
    if let Some(d) = dims.iter().find(|d| !DIM_RANGE.contains(d)) {
        return Err(BqmError::contract(format!(
            "dimension {d} is outside {}..={}",
            DIM_RANGE.start(),
            DIM_RANGE.end()
        )));
    }
    let mut checks = MaxTracker::default();
    for i in 0..trials {
        let dim = dims[i % dims.len()];
        let mut rng = rng_for(seed, &format!("trial/{i}"));
        trial(dim, &mut rng, opts, &mut checks).map_err(|e| e.with_context(&format!("trial {i} (dim {dim})")))?;
    }
    let list: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    Ok(checks.into_report(format!("verify(seed={seed},trials={trials},dims={})", list.join(","))))
}

fn random_ensemble(dim: usize, members: usize, rng: &mut SeededRng) -> Ensemble {
    let weights = random_weights(members, rng);
    Ensemble::new(
        weights
            .into_iter()
            .map(|w| EnsembleMember {
                weight: w,
                vector: StateVector(random_vector(dim, rng)),
            })
            .collect(),
    )
}

/// Ginibre matrix rescaled to Frobenius norm `norm`.
fn scaled_ginibre(dim: usize, norm: f64, rng: &mut SeededRng) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let n = g.frobenius_norm();
    g.scale_real(norm / n)
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigensystem(&m.hermitian_part(), &Tolerance::default().scaled(1e3))?.min())
}

fn trial(dim: usize, rng: &mut SeededRng, opts: &VerifyOptions, checks: &mut MaxTracker) -> Result<()> {
    let tol = Tolerance::default();
    let cfg = PhysicsConfig::default();
    let domain = Interval::new(-1.0, 2.0)?;
    let path = Path::worldline("gamma", domain);
    let (t0, t1) = (0.0, 1.0);
    let grid = TimeGrid::new(t0, t1, 200)?;

    // linalg
    let a = scaled_ginibre(dim, 1.0, rng);
    let b = scaled_ginibre(dim, 1.0, rng);
    checks.record("linalg.commutator_trace", 1e-10, commutator(&a, &b)?.trace().norm());
    checks.record("linalg.adjoint_involution", 0.0, (&a.adjoint().adjoint() - &a).max_abs());
    let big = scaled_ginibre(dim, 5.0 * rng.random_range(0.1..1.0), rng);
    let prod = &big.exp()? * &big.scale_real(-1.0).exp()?;
    checks.record("linalg.expm_inverse", 1e-9, prod.distance(&ComplexMatrix::identity(dim)));
    let members = rng.random_range(1..=dim + 1);
    let ens = random_ensemble(dim, members, rng);
    let rho_e = density_from_ensemble(&ens, t0, &tol)?;
    checks.record("linalg.ensemble_min_eigenvalue", tol.abs, (-min_eigenvalue(&rho_e.rho)?).max(0.0));

    // hilbert
    let h0 = random_hermitian(dim, rng.random_range(0.5..3.0), rng);
    let h1 = random_hermitian(dim, rng.random_range(0.5..2.0), rng);
    let omega = rng.random_range(0.5..2.0);
    let h = HamiltonianFamily::new(dim, domain, move |t| &h0 + &h1.scale_real((omega * t).sin()), &tol)?;
    let lattice = Arc::new(PropagatorLattice::new(&h, &cfg, 256.0)?);
    let u = lattice.propagator(t1, t0)?;
    let rho0 = rho_e;
    let rho_t = propagate_density(&rho0, &u)?;
    checks.record("hilbert.trace", 1e-9, (rho_t.rho.trace() - 1.0).norm());
    checks.record("hilbert.positivity", 1e-9, (-min_eigenvalue(&rho_t.rho)?).max(0.0));
    checks.record("hilbert.hermiticity", 1e-10, rho_t.rho.hermiticity_residual());
    let purity = |m: &ComplexMatrix| (m * m).trace().re;
    checks.record("hilbert.purity_drift", 1e-8, (purity(&rho_t.rho) - purity(&rho0.rho)).abs());
    let pure0 = density_from_ensemble(&random_ensemble(dim, 1, rng), t0, &tol)?;
    let pure_t = propagate_density(&pure0, &u)?.rho;
    checks.record("hilbert.pure_stays_pure", 1e-8, (&(&pure_t * &pure_t) - &pure_t).frobenius_norm());

    let u20 = evolution_operator(&h, &TimeGrid::new(t0, t1, 400)?, &cfg)?;
    let u21 = evolution_operator(&h, &TimeGrid::new(0.5, t1, 200)?, &cfg)?;
    let u10 = evolution_operator(&h, &TimeGrid::new(t0, 0.5, 200)?, &cfg)?;
    checks.record("hilbert.composition", 1e-6, u21.compose(&u10)?.matrix.distance(&u20.matrix));
    let evolved = density_from_ensemble(&ens.evolved(&u), t1, &tol)?;
    checks.record("hilbert.ensemble_evolution", 1e-8, evolved.rho.distance(&rho_t.rho));
    let obs = random_hermitian(dim, 2.0, rng);
    checks.record(
        "hilbert.expectation_cyclic",
        1e-10,
        ((&rho_t.rho * &obs).trace() - (&obs * &rho_t.rho).trace()).norm(),
    );
    let rk4 = integrate_von_neumann(&rho0, &h, &grid, &cfg)?;
    let mut integ: f64 = 0.0;
    for (k, state) in rk4.iter().enumerate() {
        let exact = rho0.rho.conjugate_by(&lattice.propagator(grid.time(k), t0)?.matrix);
        integ = integ.max(state.rho.distance(&exact));
    }
    checks.record("hilbert.integrator_vs_solution", 1e-6, integ);

    // bundle
    let frames = FrameField::random_smooth(rng.random());
    let mut unitarity: f64 = 0.0;
    for t in [-0.5, 0.0, 0.3, 1.0, 1.7] {
        unitarity = unitarity.max(frames.frame(&path, t, dim)?.unitarity_residual());
    }
    checks.record("bundle.frame_unitarity", tol.abs, unitarity);
    let transport = evolution_transport(&lattice, &frames, &path, t1, t0)?;
    let p0 = density_morphism(&rho0, &frames, &path)?;
    let p_t = propagate_density_morphism(&p0, &transport)?;
    let lifted_after = density_morphism(&rho_t, &frames, &path)?;
    checks.record("bundle.two_route_density", 1e-8, p_t.matrix().distance(lifted_after.matrix()));
    let a_t = lift_operator(&obs, &frames, &path, t1)?;
    let heis_bundle = to_heisenberg_morphism(&a_t, &transport)?;
    let heis_op = lift_operator(&to_heisenberg_operator(&obs, &u)?, &frames, &path, t0)?;
    checks.record("bundle.two_route_observable", 1e-8, heis_bundle.matrix.distance(&heis_op.matrix));
    let hilbert_mean = (&rho_t.rho * &obs).trace().re;
    checks.record("bundle.expectation_equality", 1e-9, (bundle_expectation(&p_t, &a_t)? - hilbert_mean).abs());

    let mut conn = Connection::new(h.clone(), frames.clone(), path.clone(), cfg);
    if opts.flip_gamma_sign {
        conn = conn.with_flipped_sign();
    }
    let family = |t: f64| -> Result<DensityMorphism> {
        propagate_density_morphism(&p0, &evolution_transport(&lattice, &frames, &path, t, t0)?)
    };
    let mut annihilation: f64 = 0.0;
    for t in [0.2, 0.55, 0.9] {
        let d = morphism_derivation(|s| family(s).map(|p| p.0), |s| conn.coefficients(s), t, 1e-4)?;
        annihilation = annihilation.max(d.frobenius_norm());
    }
    checks.record("bundle.derivation_annihilation", 1e-6, annihilation);

    let (r, s, t) = (0.1, 0.45, 0.95);
    let tsr = &evolution_transport(&lattice, &frames, &path, t, s)?.matrix
        * &evolution_transport(&lattice, &frames, &path, s, r)?.matrix;
    let tr = evolution_transport(&lattice, &frames, &path, t, r)?.matrix;
    let same = evolution_transport(&lattice, &frames, &path, s, s)?.matrix;
    let composition = tsr.distance(&tr).max(same.distance(&ComplexMatrix::identity(dim)));
    checks.record("bundle.transport_composition", 1e-6, composition);

    let traj = integrate_bundle_liouville(&p0, &conn, &grid)?;
    checks.record("bundle.integrator_vs_transport", 1e-6, traj.last().map_or(0.0, |p| p.matrix().distance(p_t.matrix())));

    let psi0 = random_vector(dim, rng);
    let section = {
        let (lattice, frames, path) = (lattice.clone(), frames.clone(), path.clone());
        StateSection::new(path.clone(), move |t| {
            Ok(evolution_transport(&lattice, &frames, &path, t, t0)?.matrix.apply(&psi0))
        })
    };
    let system = check_transport_section_system(&section, family, &conn, &TimeGrid::new(0.1, 0.9, 8)?, 1e-6)?;
    checks.record(
        "bundle.section_system",
        1e-6,
        system.section_residual.max(system.product_residual).max(system.density_residual),
    );

    // pictures
    let x = random_hermitian(dim, 1.0, rng);
    let y = crate::random::random_unitary(dim, rng);
    let z = crate::random::random_density(dim, rng);
    checks.record("pictures.cyclic_trace", 1e-10, ((&(&x * &y) * &z).trace() - (&(&z * &x) * &y).trace()).norm());

    let phases: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let anchor = rng.random_range(t0..t1);
    let v = PictureFamily::diagonal_phase(phases, rng.random_range(0.5..2.0), anchor)?;
    let transformed = v_transform_operator(&obs, &v, 0.7)?;
    let before = hermitian_eigensystem(&obs, &tol)?;
    let after = hermitian_eigensystem(&transformed.hermitian_part(), &tol.scaled(1e3))?;
    let spectrum = before.values.iter().zip(&after.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    checks.record("pictures.spectrum_preservation", 1e-10, spectrum);
    checks.record(
        "pictures.v_residual",
        1e-5,
        v_picture_residual(&rho0, &v, &lattice, &[0.15, 0.4, 0.6, 0.85], 1e-4)?,
    );
    let constancy = heisenberg_density(&rk4, |t, s| lattice.propagator(t, s))?;
    checks.record("pictures.heisenberg_constancy", 1e-6, constancy.max_deviation);
    let coherence = v_transform_morphism(&a_t, &v, &frames, &path)?
        .matrix
        .distance(&lift_operator(&v_transform_operator(&obs, &v, t1)?, &frames, &path, anchor)?.matrix);
    checks.record("pictures.morphism_operator_coherence", 1e-8, coherence);
    let chains = mean_chains(&MeanInstance {
        rho0: rho0.clone(),
        observable: obs.clone(),
        propagator: u.clone(),
        picture: v.clone(),
        frames: frames.clone(),
        path: path.clone(),
    })?;
    checks.record("pictures.mean_chains", 1e-9, chains.max_deviation);
    let rho0_v = DensityState {
        rho: v_transform_operator(&rho0.rho, &v, t0)?,
        time: t0,
    };
    let solution = v_picture_solution(&rho0_v, &v, &lattice, t1)?;
    checks.record(
        "pictures.v_solution_two_route",
        1e-8,
        solution.rho.distance(&v_transform_operator(&rho_t.rho, &v, t1)?),
    );
    let heis = PictureFamily::evolution(lattice.clone(), t0)?;
    let reduction = v_picture_solution(&rho0, &heis, &lattice, t1)?
        .rho
        .distance(&rho0.rho)
        .max(v_transform_operator(&obs, &heis, t1)?.distance(&to_heisenberg_operator(&obs, &u)?));
    checks.record("pictures.heisenberg_reduction", 1e-6, reduction);

    // curvature
    let (s, t) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
    let square = Interval::new(-0.5, 1.5)?;
    let id_family = TwoParamFamily::coordinate_square(square, square, h.clone(), FrameField::identity())?;
    let r_fd = curvature_fd(&id_family, s, t, 1e-3, &cfg)?.matrix;
    let r_comm = curvature_commutator(&h, s, t, &cfg)?.matrix;
    checks.record("curvature.identity_frame_agreement", 1e-4, r_fd.distance(&r_comm));
    checks.record(
        "curvature.nonflat_lower_bound",
        0.0,
        (0.5 * r_comm.frobenius_norm() - r_fd.frobenius_norm()).max(0.0),
    );
    let r_ts = curvature_commutator(&h, t, s, &cfg)?.matrix;
    checks.record("curvature.antisymmetry", 1e-12, (&r_comm + &r_ts).frobenius_norm());
    let point_family =
        TwoParamFamily::coordinate_square(square, square, h.clone(), FrameField::random_points(rng.random()))?;
    let covariance = curvature_fd(&point_family, s, t, 1e-3, &cfg)?
        .matrix
        .distance(&curvature_commutator_in_frame(&point_family, s, t, &cfg)?.matrix);
    checks.record("curvature.frame_covariance", 1e-4, covariance);

    let k = random_hermitian(dim, 1.0, rng);
    let k2 = &k * &k;
    let flat_h = HamiltonianFamily::new(dim, domain, move |t| &k.scale_real(t.sin()) + &k2.scale_real((2.0 * t).cos()), &tol)?;
    let flat_family =
        TwoParamFamily::coordinate_square(square, square, flat_h.clone(), FrameField::random_points(rng.random()))?;
    checks.record(
        "curvature.flat_family",
        1e-6,
        curvature_fd(&flat_family, s, t, 1e-3, &cfg)?.matrix.frobenius_norm(),
    );
    let flat_grid = TimeGrid::new(t0, t1, 100)?;
    let flat = flat_frame(&flat_h, &path, &flat_grid, &cfg)?;
    let flat_lattice = PropagatorLattice::new(&flat_h, &cfg, 256.0)?;
    let (mut gamma, mut ident, mut lifted): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for t in [0.0, 0.35, 0.7, 1.0] {
        gamma = gamma.max(transport_coefficients(&flat_h, &flat, &path, t, 1e-4, &cfg)?.gamma.frobenius_norm());
        let tr = evolution_transport(&flat_lattice, &flat, &path, t, t0)?;
        ident = ident.max(tr.matrix.distance(&ComplexMatrix::identity(dim)));
        let hv = flat_h.at(t);
        let lift = lift_operator(&hv, &flat, &path, t)?;
        lifted = lifted.max((hv.frobenius_norm() - lift.matrix.frobenius_norm()).max(0.0));
    }
    checks.record("curvature.flat_frame_gamma", 1e-6, gamma);
    checks.record("curvature.flat_frame_transport", 1e-6, ident);
    checks.record("curvature.flat_frame_lifted_hamiltonian", 1e-6, lifted);
    Ok(())
}
