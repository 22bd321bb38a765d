use std::f64::consts::PI;

use super::*;
use crate::bundle::{evolution_transport, lift_operator, transport_coefficients};
use crate::linalg::{pauli, Tolerance, C64, I};
use crate::random::{random_hermitian, rng_from_seed};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn interval(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

fn cfg() -> PhysicsConfig {
    PhysicsConfig::default()
}

/// `H(u) = cos(u) σx + sin(u) σy`, so `H(0) = σx` and `H(π/2) = σy`.
fn rotating() -> HamiltonianFamily {
    HamiltonianFamily::new(
        2,
        interval(-1.0, 3.0),
        |u| &pauli::x().scale_real(u.cos()) + &pauli::y().scale_real(u.sin()),
        &tol(),
    )
    .unwrap()
}

fn commuting() -> HamiltonianFamily {
    HamiltonianFamily::new(2, interval(-1.0, 4.0), |u| pauli::z().scale_real(u.sin()), &tol()).unwrap()
}

fn square(h: HamiltonianFamily, frames: FrameField) -> TwoParamFamily {
    let d = h.domain();
    TwoParamFamily::coordinate_square(d, d, h, frames).unwrap()
}

fn minus_two_i_sigma_z() -> ComplexMatrix {
    pauli::z().scale(C64::new(0.0, -2.0))
}

#[test]
fn zero_hamiltonian_has_no_curvature() {
    let h = HamiltonianFamily::zero(2, interval(-1.0, 3.0));
    let r = curvature_fd(&square(h.clone(), FrameField::identity()), 0.5, 1.5, 1e-3, &cfg()).unwrap();
    assert_eq!(r.matrix, ComplexMatrix::zeros(2));
    // Still flat in nontrivial point-based frames.
    let r = curvature_fd(&square(h, FrameField::random_points(3)), 0.5, 1.5, 1e-3, &cfg()).unwrap();
    assert!(r.matrix.frobenius_norm() < 1e-6, "{}", r.matrix.frobenius_norm());
}

#[test]
fn commuting_family_is_flat() {
    for frames in [FrameField::identity(), FrameField::random_points(5)] {
        let fam = square(commuting(), frames);
        for (s, t) in [(0.3, 2.0), (1.0, 1.0), (2.5, 0.1)] {
            let r = curvature_fd(&fam, s, t, 1e-3, &cfg()).unwrap();
            assert!(r.matrix.frobenius_norm() <= 1e-6, "{} at ({s}, {t})", fam.frames().label());
        }
    }
    let fam = square(commuting(), FrameField::identity());
    assert!(curvature_fd(&fam, 0.3, 2.0, 1e-3, &cfg()).unwrap().matrix.frobenius_norm() <= 1e-8);
}

#[test]
fn sigma_x_sigma_y_family() {
    let fam = square(rotating(), FrameField::identity());
    let r = curvature_fd(&fam, 0.0, PI / 2.0, 1e-3, &cfg()).unwrap();
    assert!(r.matrix.distance(&minus_two_i_sigma_z()) <= 1e-4, "{:?}", r.matrix);
    let c = curvature_commutator(&rotating(), 0.0, PI / 2.0, &cfg()).unwrap();
    assert!(c.matrix.distance(&minus_two_i_sigma_z()) < 1e-15);
    assert!(r.matrix.distance(&c.matrix) <= 1e-4);
}

#[test]
fn fd_converges_to_commutator_in_identity_frames() {
    let mut rng = rng_from_seed(21);
    let a = random_hermitian(2, 1.0, &mut rng);
    let b = random_hermitian(2, 1.0, &mut rng);
    let h = HamiltonianFamily::new(2, interval(-1.0, 3.0), move |u| &a + &b.scale_real((1.3 * u).cos()), &tol()).unwrap();
    let fam = square(h.clone(), FrameField::identity());
    for (s, t) in [(0.2, 1.7), (2.1, 0.4)] {
        let c = curvature_commutator(&h, s, t, &cfg()).unwrap().matrix;
        let coarse = curvature_fd(&fam, s, t, 1e-3, &cfg()).unwrap().matrix.distance(&c);
        let fine = curvature_fd(&fam, s, t, 1e-4, &cfg()).unwrap().matrix.distance(&c);
        assert!(coarse <= 1e-4, "{coarse}");
        assert!(fine <= 1e-6, "{fine}");
    }
}

#[test]
fn curvature_is_covariant_under_point_frames() {
    let fam = square(rotating(), FrameField::random_points(9));
    for (s, t) in [(0.0, PI / 2.0), (1.2, 0.3)] {
        let fd = curvature_fd(&fam, s, t, 1e-3, &cfg()).unwrap().matrix;
        let expected = curvature_commutator_in_frame(&fam, s, t, &cfg()).unwrap().matrix;
        assert!(fd.distance(&expected) <= 1e-4, "({s}, {t}): {}", fd.distance(&expected));
        // Not the identity-frame value.
        let bare = curvature_commutator(fam.hamiltonian(), s, t, &cfg()).unwrap().matrix;
        assert!(fd.distance(&bare) > 1e-3);
    }
}

#[test]
fn curvature_scales_with_hbar() {
    let cfg = PhysicsConfig::new(2.0).unwrap();
    let fam = square(rotating(), FrameField::identity());
    let r = curvature_fd(&fam, 0.0, PI / 2.0, 1e-3, &cfg).unwrap();
    assert!(r.matrix.distance(&minus_two_i_sigma_z().scale_real(0.25)) <= 1e-4);
}

#[test]
fn commutator_form_examples() {
    let h = rotating();
    assert_eq!(curvature_commutator(&h, 0.7, 0.7, &cfg()).unwrap().matrix, ComplexMatrix::zeros(2));
    let constant = HamiltonianFamily::constant(pauli::y(), interval(0.0, 1.0), &tol()).unwrap();
    assert_eq!(curvature_commutator(&constant, 0.1, 0.9, &cfg()).unwrap().matrix, ComplexMatrix::zeros(2));
    let r_st = curvature_commutator(&h, 0.2, 1.1, &cfg()).unwrap().matrix;
    let r_ts = curvature_commutator(&h, 1.1, 0.2, &cfg()).unwrap().matrix;
    assert!((&r_st + &r_ts).frobenius_norm() < 1e-15);
    assert!(curvature_commutator(&h, 5.0, 0.0, &cfg()).is_err());
}

#[test]
fn fd_curvature_is_antisymmetric() {
    let fam = square(rotating(), FrameField::identity());
    let a = curvature_fd(&fam, 0.4, 1.9, 1e-3, &cfg()).unwrap().matrix;
    let b = curvature_fd(&fam, 1.9, 0.4, 1e-3, &cfg()).unwrap().matrix;
    assert!((&a + &b).frobenius_norm() <= 1e-6);
}

#[test]
fn noncommuting_pairs_are_detected() {
    let fam = square(rotating(), FrameField::random_points(2));
    for (s, t) in [(0.0, 0.5), (0.3, 2.2), (-0.5, 1.0)] {
        let r = curvature_fd(&fam, s, t, 1e-3, &cfg()).unwrap().matrix.frobenius_norm();
        let c = commutator(&rotating().at(s), &rotating().at(t)).unwrap().frobenius_norm();
        assert!(r >= 0.5 * c, "({s}, {t}): {r} vs {c}");
    }
}

#[test]
fn boundary_points_are_rejected() {
    let fam = square(rotating(), FrameField::identity());
    let err = curvature_fd(&fam, -1.0, 0.0, 1e-3, &cfg()).unwrap_err();
    assert!(matches!(err, BqmError::Contract(_)));
    assert!(curvature_fd(&fam, 0.0, 0.0, 0.0, &cfg()).is_err());
}

#[test]
fn families_need_point_based_frames() {
    let d = rotating().domain();
    let err = TwoParamFamily::coordinate_square(d, d, rotating(), FrameField::random_smooth(1)).unwrap_err();
    assert!(matches!(err, BqmError::Contract(_)));
    let wide = interval(-2.0, 3.0);
    assert!(TwoParamFamily::coordinate_square(wide, d, rotating(), FrameField::identity()).is_err());
}

#[test]
fn flatness_scan() {
    let samples: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
    let v = is_flat(&commuting(), &samples, 1e-12).unwrap();
    assert!(v.flat && v.witness().is_none());
    let constant = HamiltonianFamily::constant(pauli::x(), interval(0.0, 4.0), &tol()).unwrap();
    assert!(is_flat(&constant, &samples, 1e-12).unwrap().flat);

    let switch = HamiltonianFamily::new(
        2,
        interval(0.0, 4.0),
        |t| if t < 2.0 { pauli::x() } else { pauli::y() },
        &tol(),
    )
    .unwrap();
    let v = is_flat(&switch, &samples, 1e-8).unwrap();
    assert!(!v.flat);
    let (s, t) = v.witness().unwrap();
    assert!(s.min(t) < 2.0 && s.max(t) >= 2.0, "witness ({s}, {t})");
    assert!((v.max_norm - commutator(&pauli::x(), &pauli::y()).unwrap().frobenius_norm()).abs() < 1e-12);

    assert!(is_flat(&commuting(), &[1.0], 1e-8).is_err());
}

#[test]
fn flat_frame_for_constant_sigma_z() {
    let h = HamiltonianFamily::constant(pauli::z(), interval(-1.0, 5.0), &tol()).unwrap();
    let path = Path::worldline("gamma", interval(-1.0, 5.0));
    let grid = TimeGrid::new(0.0, 4.0, 400).unwrap();
    let frames = flat_frame(&h, &path, &grid, &cfg()).unwrap();
    for t in [0.0, 1.0, 3.3] {
        let l = frames.frame(&path, t, 2).unwrap();
        let expected = ComplexMatrix::diagonal(&[(-I * t).exp(), (I * t).exp()]);
        assert!(l.distance(&expected) < 1e-8);
    }
    check_flat_frames(&h, &path, &grid, &frames);
}

#[test]
fn flat_frame_for_zero_hamiltonian() {
    let h = HamiltonianFamily::zero(3, interval(-1.0, 5.0));
    let path = Path::worldline("gamma", interval(-1.0, 5.0));
    let grid = TimeGrid::new(0.0, 4.0, 100).unwrap();
    let frames = flat_frame(&h, &path, &grid, &cfg()).unwrap();
    for t in [0.0, 2.5] {
        assert_eq!(frames.frame(&path, t, 3).unwrap(), ComplexMatrix::identity(3));
    }
    let g = transport_coefficients(&h, &frames, &path, 1.0, 1e-4, &cfg()).unwrap();
    assert_eq!(g.gamma, ComplexMatrix::zeros(3));
}

#[test]
fn flat_frame_for_sine_drive() {
    let h = commuting();
    let path = Path::worldline("gamma", interval(-1.0, 4.0));
    let grid = TimeGrid::new(0.0, PI, 2000).unwrap();
    let frames = flat_frame(&h, &path, &grid, &cfg()).unwrap();
    check_flat_frames(&h, &path, &grid, &frames);
}

fn check_flat_frames(h: &HamiltonianFamily, path: &Path, grid: &TimeGrid, frames: &FrameField) {
    let lattice = PropagatorLattice::new(h, &cfg(), 256.0).unwrap();
    let probes: Vec<f64> = (0..=20).map(|k| grid.time(k * grid.steps / 20)).collect();
    for &t in &probes {
        let g = transport_coefficients(h, frames, path, t, 1e-4, &cfg()).unwrap();
        assert!(g.gamma.frobenius_norm() <= 1e-6, "Γ at {t}: {}", g.gamma.frobenius_norm());
        let tr = evolution_transport(&lattice, frames, path, t, grid.t0).unwrap();
        let gap = tr.matrix.distance(&ComplexMatrix::identity(h.dim()));
        assert!(gap <= 1e-6, "transport at {t}: {gap}");
        // Γ vanishes, but the Hamiltonian seen in the flat frame does not.
        let lifted = lift_operator(&h.at(t), frames, path, t).unwrap();
        assert!(lifted.matrix.frobenius_norm() >= h.at(t).frobenius_norm() - 1e-6);
    }
}

#[test]
fn flat_frame_rejects_curved_families() {
    let h = rotating();
    let path = Path::worldline("gamma", interval(-1.0, 3.0));
    let grid = TimeGrid::new(0.0, 2.0, 100).unwrap();
    match flat_frame(&h, &path, &grid, &cfg()) {
        Err(BqmError::NotFlat { s, t, norm }) => {
            assert!(norm > 1.0);
            assert!(s != t);
        }
        other => panic!("expected NotFlat, got {other:?}"),
    }
    let short = Path::worldline("short", interval(0.0, 1.0));
    assert!(matches!(flat_frame(&commuting(), &short, &grid, &cfg()), Err(BqmError::Contract(_))));
}

#[test]
fn curvature_table_rows() {
    let fam = square(rotating(), FrameField::identity());
    let rows = curvature_table(&fam, &[0.0, 1.0], &[0.5, PI / 2.0, 2.0], 1e-3, &cfg()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.gap <= 1e-4));
    assert_eq!((rows[1].s, rows[1].t), (0.0, PI / 2.0));
}
