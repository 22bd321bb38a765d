//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::sync::Arc;

use bqm::bundle::{
    bundle_expectation, check_transport_section_system, density_morphism, evolution_transport,
    integrate_bundle_liouville, lift_operator, morphism_derivation, propagate_density_morphism, transport_coefficients,
    Connection, DensityMorphism, FrameField, MorphismValue, Path, StateSection,
};
use bqm::curvature::{curvature_commutator, curvature_fd, flat_frame, TwoParamFamily};
use bqm::hilbert::{
    evolution_operator, integrate_von_neumann, DensityState, HamiltonianFamily, Interval, PhysicsConfig,
    PropagatorLattice, TimeGrid,
};
use bqm::linalg::{hermitian_eigensystem, pauli};
use bqm::pictures::{
    heisenberg_density, heisenberg_density_morphism, mean_chains, v_picture_generator, v_picture_residual,
    v_picture_solution, v_transform_operator, MeanInstance, PictureFamily,
};
use bqm::random::{random_density, random_hermitian, random_unitary, random_vector, random_weights, rng_for};
use bqm::{ComplexMatrix, Result, Tolerance, C64};
use rand::Rng;

const I: C64 = C64::new(0.0, 1.0);

/// Named measurements for one criterion.
struct Tally {
    entries: Vec<(&'static str, f64, f64)>,
}

impl Tally {
    fn new() -> Self {
        Tally { entries: Vec::new() }
    }

    fn max(&mut self, name: &'static str, threshold: f64, value: f64) {
        match self.entries.iter_mut().find(|e| e.0 == name) {
            Some(e) => e.2 = if value.is_nan() { value } else { e.2.max(value) },
            None => self.entries.push((name, threshold, value)),
        }
    }

    /// Records a boolean condition as 0 (holds) or 1 (violated).
    fn holds(&mut self, name: &'static str, ok: bool) {
        self.max(name, 0.0, if ok { 0.0 } else { 1.0 });
    }

    fn pass(&self) -> bool {
        self.entries.iter().all(|(_, thr, v)| *v <= *thr)
    }

    fn line(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(n, thr, v)| format!("{n}={v:.2e}{}{thr:.0e}", if v <= thr { "<=" } else { ">" }))
            .collect();
        parts.join(" ")
    }
}

// Closed-form oracles.

fn pauli_exp(theta: f64, sigma: &ComplexMatrix) -> ComplexMatrix {
    // exp(-i θ σ) = cos θ I - i sin θ σ for σ² = I
    &ComplexMatrix::identity(2).scale_real(theta.cos()) + &sigma.scale(-I * theta.sin())
}

/// Resonant drive `H(t) = ω/2 σz + g (cos ωt σx + sin ωt σy)`, hbar = 1.
#[derive(Clone, Copy)]
struct Rabi {
    omega: f64,
    g: f64,
}

impl Rabi {
    fn h(&self, t: f64) -> ComplexMatrix {
        let (w, g) = (self.omega, self.g);
        &(&pauli::z().scale_real(0.5 * w) + &pauli::x().scale_real(g * (w * t).cos()))
            + &pauli::y().scale_real(g * (w * t).sin())
    }

    /// `U(t, 0) = exp(-i ωt σz / 2) exp(-i g t σx)`.
    fn u0(&self, t: f64) -> ComplexMatrix {
        &pauli_exp(0.5 * self.omega * t, &pauli::z()) * &pauli_exp(self.g * t, &pauli::x())
    }

    fn u(&self, t: f64, s: f64) -> ComplexMatrix {
        &self.u0(t) * &self.u0(s).adjoint()
    }

    fn family(&self, domain: Interval) -> HamiltonianFamily {
        let me = *self;
        HamiltonianFamily::new(2, domain, move |t| me.h(t), &Tolerance::default()).unwrap()
    }
}

/// `H(t) = f(t) W D W^dagger` with `f(t) = 1 + 0.5 sin(2t)`; `F` is the
/// antiderivative of `f` from 0.
struct Commuting {
    w: ComplexMatrix,
    d: Vec<f64>,
}

impl Commuting {
    fn random(dim: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, "commuting");
        Commuting {
            w: random_unitary(dim, &mut rng),
            d: (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(),
        }
    }

    fn f(t: f64) -> f64 {
        1.0 + 0.5 * (2.0 * t).sin()
    }

    fn big_f(t: f64) -> f64 {
        t + 0.25 * (1.0 - (2.0 * t).cos())
    }

    fn k(&self) -> ComplexMatrix {
        ComplexMatrix::real_diagonal(&self.d).conjugate_by(&self.w)
    }

    fn u(&self, t: f64, s: f64) -> ComplexMatrix {
        let phi = Commuting::big_f(t) - Commuting::big_f(s);
        let diag: Vec<C64> = self.d.iter().map(|&x| (-I * x * phi).exp()).collect();
        ComplexMatrix::diagonal(&diag).conjugate_by(&self.w)
    }

    fn family(&self, domain: Interval) -> HamiltonianFamily {
        let k = self.k();
        HamiltonianFamily::new(self.d.len(), domain, move |t| k.scale_real(Commuting::f(t)), &Tolerance::default())
            .unwrap()
    }
}

fn tr(a: &ComplexMatrix) -> C64 {
    let n = a.dim();
    (0..n).map(|i| a.as_slice()[i * n + i]).sum()
}

fn tr_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let (n, x, y) = (a.dim(), a.as_slice(), b.as_slice());
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += x[i * n + j] * y[j * n + i];
        }
    }
    s
}

/// Cholesky of `a + shift I`; succeeds iff every eigenvalue of the Hermitian
/// matrix `a` exceeds `-shift`.
fn cholesky_ok(a: &ComplexMatrix, shift: f64) -> bool {
    let n = a.dim();
    let mut m: Vec<C64> = a.as_slice().to_vec();
    for i in 0..n {
        m[i * n + i] += shift;
    }
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = m[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let djj = d.sqrt();
        l[j * n + j] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / djj;
        }
    }
    true
}

fn random_mixture(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let members = rng.random_range(1..=dim);
    let weights = random_weights(members, rng);
    let mut rho = ComplexMatrix::zeros(dim);
    for w in weights {
        let v = random_vector(dim, rng);
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        rho += &ComplexMatrix::outer(&v, &v).scale_real(w / n);
    }
    rho
}

fn state(rho: ComplexMatrix, t: f64) -> DensityState {
    DensityState { rho, time: t }
}

fn cfg() -> PhysicsConfig {
    PhysicsConfig::default()
}

fn domain() -> Interval {
    Interval::new(-1.0, 2.5).unwrap()
}

// Criteria.

fn state_invariants(t: &mut Tally) -> Result<()> {
    for i in 0..50u64 {
        let mut rng = rng_for(i, "acceptance/scenario");
        let dim = 2 + (i as usize % 7);
        let h0 = random_hermitian(dim, rng.random_range(0.5..3.0), &mut rng);
        let h1 = random_hermitian(dim, rng.random_range(0.2..2.0), &mut rng);
        let w = rng.random_range(0.5..3.0);
        let h = HamiltonianFamily::new(dim, domain(), move |t| &h0 + &h1.scale_real((w * t).cos()), &Tolerance::default())?;
        let rho0 = random_mixture(dim, &mut rng);
        let p0 = tr_product(&rho0, &rho0).re;
        let traj = integrate_von_neumann(&state(rho0, 0.0), &h, &TimeGrid::new(0.0, 1.0, 500)?, &cfg())?;
        for s in traj.iter().step_by(25) {
            let rho = &s.rho;
            t.max("trace", 1e-9, (tr(rho) - 1.0).norm());
            let herm = (rho - &rho.adjoint()).frobenius_norm();
            t.max("hermiticity", 1e-10, herm);
            let min_eig = hermitian_eigensystem(&rho.hermitian_part(), &Tolerance::default().scaled(1e3))?.min();
            t.max("neg_eig", 1e-9, (-min_eig).max(0.0));
            t.holds("psd_cholesky", cholesky_ok(&rho.hermitian_part(), 1e-9));
            t.max("purity_drift", 1e-8, (tr_product(rho, rho).re - p0).abs());
        }
    }
    Ok(())
}

fn integrator_endpoints(t: &mut Tally) -> Result<()> {
    let grid = TimeGrid::new(0.0, 2.0, 2000)?;
    let (t0, t1) = (grid.t0, grid.t1);
    let path = Path::worldline("gamma", domain());
    let rabi = Rabi { omega: 1.3, g: 0.7 };
    let comm = Commuting::random(4, 9);
    let cases: Vec<(HamiltonianFamily, ComplexMatrix)> =
        vec![(rabi.family(domain()), rabi.u(t1, t0)), (comm.family(domain()), comm.u(t1, t0))];
    for (k, (h, u_exact)) in cases.into_iter().enumerate() {
        let dim = h.dim();
        let mut rng = rng_for(k as u64, "acceptance/integrator");
        let rho0 = random_mixture(dim, &mut rng);
        let exact = rho0.conjugate_by(&u_exact);
        let traj = integrate_von_neumann(&state(rho0.clone(), t0), &h, &grid, &cfg())?;
        t.max("hilbert_endpoint", 1e-6, traj.last().unwrap().rho.distance(&exact));
        let u = evolution_operator(&h, &grid, &cfg())?;
        t.max("propagator_endpoint", 1e-6, u.matrix.distance(&u_exact));

        let frames = FrameField::random_smooth(rng.random());
        let p0 = density_morphism(&state(rho0, t0), &frames, &path)?;
        let conn = Connection::new(h.clone(), frames.clone(), path.clone(), cfg());
        let bundle = integrate_bundle_liouville(&p0, &conn, &grid)?;
        let transport = &frames.frame(&path, t1, dim)?.adjoint() * &(&u_exact * &frames.frame(&path, t0, dim)?);
        let p_exact = p0.matrix().conjugate_by(&transport);
        t.max("bundle_endpoint", 1e-6, bundle.last().unwrap().matrix().distance(&p_exact));
    }
    Ok(())
}

fn frame_expectations(t: &mut Tally) -> Result<()> {
    let path = Path::worldline("gamma", domain());
    for i in 0..40u64 {
        let mut rng = rng_for(i, "acceptance/frames");
        let dim = 2 + (i as usize % 7);
        let frames = if i % 2 == 0 {
            FrameField::random_smooth(rng.random())
        } else {
            FrameField::random_points(rng.random())
        };
        let time = rng.random_range(-0.5..2.0);
        let rho = random_density(dim, &mut rng);
        let a = random_hermitian(dim, 3.0, &mut rng);
        let p = density_morphism(&state(rho.clone(), time), &frames, &path)?;
        let a_lift = lift_operator(&a, &frames, &path, time)?;
        let hilbert = tr_product(&rho, &a).re;
        t.max("mean_gap", 1e-9, (hilbert - bundle_expectation(&p, &a_lift)?).abs());
        let l = frames.frame(&path, time, dim)?;
        let direct = tr_product(&rho.conjugate_by_adjoint(&l), &a.conjugate_by_adjoint(&l)).re;
        t.max("mean_gap_direct", 1e-9, (hilbert - direct).abs());
    }
    Ok(())
}

fn mean_chains_and_constancy(t: &mut Tally) -> Result<()> {
    let path = Path::worldline("gamma", domain());
    let grid = TimeGrid::new(0.0, 1.0, 2000)?;
    for i in 0..12u64 {
        let mut rng = rng_for(i, "acceptance/chains");
        let dim = 2 + (i as usize % 5);
        let h0 = random_hermitian(dim, 2.0, &mut rng);
        let h1 = random_hermitian(dim, 1.0, &mut rng);
        let h = HamiltonianFamily::new(dim, domain(), move |t| &h0 + &h1.scale_real(t.sin()), &Tolerance::default())?;
        let lattice = Arc::new(PropagatorLattice::new(&h, &cfg(), 256.0)?);
        let frames = FrameField::random_smooth(rng.random());
        let rho0 = state(random_mixture(dim, &mut rng), 0.0);
        let phases: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pictures = [
            PictureFamily::diagonal_phase(phases, 1.7, 0.4)?,
            PictureFamily::evolution(lattice.clone(), 0.3)?,
        ];
        for picture in pictures {
            for &time in &[0.25, 0.8] {
                let chains = mean_chains(&MeanInstance {
                    rho0: rho0.clone(),
                    observable: random_hermitian(dim, 2.0, &mut rng),
                    propagator: lattice.propagator(time, 0.0)?,
                    picture: picture.clone(),
                    frames: frames.clone(),
                    path: path.clone(),
                })?;
                t.max("chain_deviation", 1e-9, chains.max_deviation);
            }
        }
        if i < 4 {
            let traj = integrate_von_neumann(&rho0, &h, &grid, &cfg())?;
            t.max("hilbert_constancy", 1e-6, heisenberg_density(&traj, |a, b| lattice.propagator(a, b))?.max_deviation);
            let p0 = density_morphism(&rho0, &frames, &path)?;
            let conn = Connection::new(h.clone(), frames.clone(), path.clone(), cfg());
            let btraj = integrate_bundle_liouville(&p0, &conn, &grid)?;
            let report = heisenberg_density_morphism(&btraj, |a, b| evolution_transport(&lattice, &frames, &path, a, b))?;
            t.max("bundle_constancy", 1e-6, report.max_deviation);
        }
    }
    Ok(())
}

fn diag_phase(phases: &[f64], omega: f64, anchor: f64, time: f64) -> ComplexMatrix {
    let d: Vec<C64> = phases.iter().map(|&p| (-I * omega * (time - anchor) * p).exp()).collect();
    ComplexMatrix::diagonal(&d)
}

fn v_pictures(t: &mut Tally) -> Result<()> {
    let rabi = Rabi { omega: 1.1, g: 0.8 };
    let h = rabi.family(domain());
    let lattice = Arc::new(PropagatorLattice::new(&h, &cfg(), 256.0)?);
    let times = [0.1, 0.35, 0.6, 0.85, 1.2, 1.6];
    for i in 0..6u64 {
        let mut rng = rng_for(i, "acceptance/vpicture");
        let rho0 = state(random_mixture(2, &mut rng), 0.0);
        let phases = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (omega, anchor) = (rng.random_range(0.3..2.0), rng.random_range(0.0..1.0));
        let v = PictureFamily::diagonal_phase(phases.to_vec(), omega, anchor)?;
        t.max("v_residual", 1e-5, v_picture_residual(&rho0, &v, &lattice, &times, 1e-4)?);

        let rho0_v = state(v_transform_operator(&rho0.rho, &v, 0.0)?, 0.0);
        for &time in &times {
            let got = v_picture_solution(&rho0_v, &v, &lattice, time)?;
            let vt = diag_phase(&phases, omega, anchor, time);
            let exact = rho0.rho.conjugate_by(&rabi.u(time, 0.0)).conjugate_by(&vt);
            t.max("v_reconstruction", 1e-8, got.rho.distance(&exact));
        }

        let evo = PictureFamily::evolution(lattice.clone(), anchor)?;
        let a = random_hermitian(2, 2.0, &mut rng);
        for &time in &times {
            let u = rabi.u(time, anchor);
            let a_h = a.conjugate_by_adjoint(&u);
            t.max("evolution_observable", 1e-6, v_transform_operator(&a, &evo, time)?.distance(&a_h));
            let rho_t = rho0.rho.conjugate_by(&rabi.u(time, 0.0));
            let frozen = rho0.rho.conjugate_by(&rabi.u(anchor, 0.0));
            t.max("evolution_density", 1e-6, v_transform_operator(&rho_t, &evo, time)?.distance(&frozen));
            let g = v_picture_generator(&evo, &h, time, 1e-4, &cfg())?;
            t.max("evolution_generator", 1e-6, g.matrix.frobenius_norm());
        }
    }
    Ok(())
}

fn curvature(t: &mut Tally) -> Result<()> {
    let square = Interval::new(-0.5, 1.5)?;
    let probes = [(0.1, 0.7), (0.45, 0.2), (0.9, 0.55)];
    for seed in 0..3u64 {
        let comm = Commuting::random(3 + seed as usize, seed);
        let h = comm.family(domain());
        for frames in [FrameField::identity(), FrameField::random_points(seed)] {
            let fam = TwoParamFamily::coordinate_square(square, square, h.clone(), frames)?;
            for &(s, tt) in &probes {
                t.max("commuting_fd", 1e-6, curvature_fd(&fam, s, tt, 1e-3, &cfg())?.matrix.frobenius_norm());
            }
        }

        let path = Path::worldline("gamma", domain());
        let grid = TimeGrid::new(0.0, 1.0, 200)?;
        let flat = flat_frame(&h, &path, &grid, &cfg())?;
        let lattice = PropagatorLattice::new(&h, &cfg(), 256.0)?;
        let id = ComplexMatrix::identity(h.dim());
        for k in (0..=200).step_by(20) {
            let time = grid.time(k);
            let gamma = transport_coefficients(&h, &flat, &path, time, 1e-4, &cfg())?.gamma;
            t.max("flat_gamma", 1e-6, gamma.frobenius_norm());
            let tr = evolution_transport(&lattice, &flat, &path, time, 0.0)?;
            t.max("flat_transport", 1e-6, tr.matrix.distance(&id));
        }
    }

    // H(τ) = cos(πτ/2) σx + sin(πτ/2) σy, so H(0) = σx and H(1) = σy.
    let q = std::f64::consts::FRAC_PI_2;
    let h = HamiltonianFamily::new(
        2,
        domain(),
        move |x| &pauli::x().scale_real((q * x).cos()) + &pauli::y().scale_real((q * x).sin()),
        &Tolerance::default(),
    )?;
    let fam = TwoParamFamily::coordinate_square(square, square, h.clone(), FrameField::identity())?;
    for &(s, tt) in &[(0.0, 1.0), (0.3, 0.8), (1.0, 0.2)] {
        let fd = curvature_fd(&fam, s, tt, 1e-3, &cfg())?.matrix;
        t.max("xy_fd_vs_commutator", 1e-4, fd.distance(&curvature_commutator(&h, s, tt, &cfg())?.matrix));
        // -[H(s), H(t)] = -2i sin(π(t-s)/2) σz
        let oracle = pauli::z().scale(-2.0 * I * (q * (tt - s)).sin());
        t.max("xy_fd_vs_closed_form", 1e-4, fd.distance(&oracle));
    }
    let fd = curvature_fd(&fam, 0.0, 1.0, 1e-3, &cfg())?.matrix;
    t.max("minus_2i_sigma_z", 1e-4, fd.distance(&pauli::z().scale(-2.0 * I)));
    Ok(())
}

fn section_systems(t: &mut Tally) -> Result<()> {
    let path = Path::worldline("gamma", domain());
    let probe = TimeGrid::new(0.1, 1.9, 12)?;
    for i in 0..6u64 {
        let mut rng = rng_for(i, "acceptance/sections");
        let dim = 2 + i as usize % 3;
        let h0 = random_hermitian(dim, 2.0, &mut rng);
        let h1 = random_hermitian(dim, 1.0, &mut rng);
        let h = HamiltonianFamily::new(dim, domain(), move |t| &h0 + &h1.scale_real((1.3 * t).cos()), &Tolerance::default())?;
        let lattice = Arc::new(PropagatorLattice::new(&h, &cfg(), 256.0)?);
        let frames = FrameField::random_smooth(rng.random());
        let conn = Connection::new(h.clone(), frames.clone(), path.clone(), cfg());
        let p0 = density_morphism(&state(random_mixture(dim, &mut rng), 0.0), &frames, &path)?;

        let evolving = {
            let (lattice, frames, path, p0) = (lattice.clone(), frames.clone(), path.clone(), p0.clone());
            move |time: f64| -> Result<DensityMorphism> {
                propagate_density_morphism(&p0, &evolution_transport(&lattice, &frames, &path, time, 0.0)?)
            }
        };
        for k in 0..=probe.steps {
            let time = probe.time(k);
            let d = morphism_derivation(|x| evolving(x).map(|p| p.0), |x| conn.coefficients(x), time, 1e-4)?;
            t.max("derivation_pointwise", 1e-6, d.frobenius_norm());
        }

        let psi0 = random_vector(dim, &mut rng);
        let transported = {
            let (lattice, frames, path, psi0) = (lattice.clone(), frames.clone(), path.clone(), psi0.clone());
            StateSection::new(path.clone(), move |time| {
                Ok(evolution_transport(&lattice, &frames, &path, time, 0.0)?.matrix.apply(&psi0))
            })
        };
        let frozen = StateSection::constant(path.clone(), psi0.clone());
        let still = {
            let m = p0.clone();
            move |time: f64| -> Result<DensityMorphism> {
                Ok(DensityMorphism(MorphismValue {
                    time,
                    ..m.0.clone()
                }))
            }
        };
        let reports = [
            check_transport_section_system(&transported, &evolving, &conn, &probe, 1e-6)?,
            check_transport_section_system(&transported, &still, &conn, &probe, 1e-6)?,
            check_transport_section_system(&frozen, &evolving, &conn, &probe, 1e-6)?,
            check_transport_section_system(&frozen, &still, &conn, &probe, 1e-6)?,
        ];
        t.holds(
            "all_true_when_both_transported",
            reports[0].section_transported && reports[0].product_transported && reports[0].density_equation,
        );
        for r in &reports {
            let count = [r.section_transported, r.product_transported, r.density_equation]
                .iter()
                .filter(|&&b| b)
                .count();
            t.holds("two_imply_three", count != 2);
        }
    }
    Ok(())
}

fn cli_verify(t: &mut Tally) -> Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let run = |out: &std::path::Path| {
        Command::new(env!("CARGO_BIN_EXE_bqm"))
            .args(["verify", "--seed", "0", "--trials", "50", "--dims", "2,3,4", "--out"])
            .arg(out)
            .output()
            .expect("bqm runs")
    };
    let (a_dir, b_dir) = (dir.path().join("a"), dir.path().join("b"));
    let a = run(&a_dir);
    let b = run(&b_dir);
    t.holds("exit_zero", a.status.code() == Some(0) && b.status.code() == Some(0));
    t.holds("stdout_identical", a.stdout == b.stdout && !a.stdout.is_empty());
    let ra = std::fs::read(a_dir.join("report.json")).unwrap_or_default();
    let rb = std::fs::read(b_dir.join("report.json")).unwrap_or_default();
    t.holds("report_identical", ra == rb && !ra.is_empty());
    Ok(())
}

type Criterion = fn(&mut Tally) -> Result<()>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("state invariants over 50 random scenarios", state_invariants),
        ("integrator endpoints vs closed form", integrator_endpoints),
        ("expectations agree across random frames", frame_expectations),
        ("mean-value chains and Heisenberg constancy", mean_chains_and_constancy),
        ("rotating pictures", v_pictures),
        ("curvature", curvature),
        ("covariant derivation and section systems", section_systems),
        ("verify CLI exit status and determinism", cli_verify),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let mut tally = Tally::new();
        let ok = match run(&mut tally) {
            Ok(()) => tally.pass(),
            Err(e) => {
                tally.entries.clear();
                println!("{label}: FAIL {name}: error: {e}");
                all = false;
                continue;
            }
        };
        all &= ok;
        println!("{label}: {} {name}: {}", if ok { "PASS" } else { "FAIL" }, tally.line());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
