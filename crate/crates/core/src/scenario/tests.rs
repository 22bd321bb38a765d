use super::*;
use crate::error::BqmError;
use crate::linalg::Tolerance;

const MINIMAL: &str = r#"{
  "name": "minimal",
  "dim": 2,
  "hamiltonian": { "kind": "constant", "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]] },
  "ensemble": [{ "weight": 1.0, "vector": [[1, 0], [1, 0]] }],
  "grid": { "t0": 0.0, "t1": 1.0, "steps": 100 },
  "observables": [{ "name": "sx", "matrix": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]] }]
}"#;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn patched(from: &str, to: &str) -> String {
    assert!(MINIMAL.contains(from), "pattern {from} not in the minimal config");
    MINIMAL.replacen(from, to, 1)
}

fn validation_field(text: &str) -> String {
    match parse_config(text, &tol()) {
        Err(BqmError::Validation { field, .. }) => field,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn minimal_config_is_valid() {
    let cfg = parse_config(MINIMAL, &tol()).unwrap();
    assert_eq!(cfg.dim, 2);
    assert_eq!(cfg.hbar, 1.0);
    assert_eq!(cfg.frames, FrameSpec::Identity);
    assert_eq!(cfg.picture, PictureSpec::Schrodinger);
    assert_eq!(cfg.tolerances, Thresholds::default());
    assert_eq!(cfg.outputs, Outputs::default());
    assert_eq!(cfg.observables.len(), 1);
    assert_eq!(cfg.domain().start, -DOMAIN_PADDING);
}

#[test]
fn weights_not_summing_to_one_name_the_ensemble() {
    assert_eq!(validation_field(&patched("\"weight\": 1.0", "\"weight\": 0.9")), "ensemble");
}

#[test]
fn non_hermitian_observable_is_named() {
    let text = patched("[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]", "[[[0, 0], [1, 0]], [[0, 0], [0, 0]]]");
    assert_eq!(validation_field(&text), "observables.sx");
}

#[test]
fn random_frames_need_a_seed() {
    let text = patched("\"grid\"", "\"frames\": { \"kind\": \"random-unitary\" }, \"grid\"");
    assert_eq!(validation_field(&text), "frames.seed");
    let text = patched("\"grid\"", "\"seed\": 4, \"frames\": { \"kind\": \"random-unitary\" }, \"grid\"");
    assert_eq!(parse_config(&text, &tol()).unwrap().frames, FrameSpec::RandomUnitary { seed: 4 });
}

#[test]
fn zero_steps_rejected() {
    assert_eq!(validation_field(&patched("\"steps\": 100", "\"steps\": 0")), "grid.steps");
}

#[test]
fn wrong_vector_length_rejected() {
    assert_eq!(validation_field(&patched("[[1, 0], [1, 0]]", "[[1, 0]]")), "ensemble[0].vector");
}

#[test]
fn parse_errors_carry_a_position() {
    let text = patched("\"dim\": 2,", "\"dim\": 2,,");
    match parse_config(&text, &tol()) {
        Err(BqmError::Parse { line, column, .. }) => {
            assert_eq!(line, 3);
            assert!(column > 0);
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn unknown_fields_rejected() {
    let text = patched("\"dim\": 2,", "\"dim\": 2, \"colour\": 1,");
    assert!(matches!(parse_config(&text, &tol()), Err(BqmError::Parse { .. })));
}

#[test]
fn curvature_samples_must_lie_in_the_grid() {
    let text = patched("\"grid\"", "\"curvature\": { \"s\": [0.5, 3.0], \"t\": [0.5] }, \"grid\"");
    assert_eq!(validation_field(&text), "curvature.s[1]");
}

#[test]
fn harmonic_drive_and_table_evaluate() {
    let x = crate::linalg::pauli::x();
    let z = crate::linalg::pauli::z();
    let drive = HamiltonianSpec::HarmonicDrive {
        h0: z.clone(),
        h1: x.clone(),
        omega: 2.0,
        phase: 0.0,
    };
    assert!(drive.evaluate(0.0).distance(&(&z + &x)) < 1e-15);
    let table = HamiltonianSpec::CustomTable {
        times: vec![0.0, 1.0],
        matrices: vec![z.clone(), x.clone()],
    };
    assert!(table.evaluate(0.5).distance(&(&z.scale_real(0.5) + &x.scale_real(0.5))) < 1e-15);
    assert_eq!(table.evaluate(-3.0), z);
    assert_eq!(table.evaluate(7.0), x);
    let pieces = HamiltonianSpec::PiecewiseConstant {
        breakpoints: vec![0.5],
        matrices: vec![z.clone(), x.clone()],
    };
    assert_eq!(pieces.evaluate(0.49), z);
    assert_eq!(pieces.evaluate(0.5), x);
}

#[test]
fn zero_hamiltonian_has_no_gaps() {
    let text = patched("[[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]", "[[[0, 0], [0, 0]], [[0, 0], [0, 0]]]");
    let cfg = parse_config(&text, &tol()).unwrap();
    let (table, report) = run_evolve(&cfg).unwrap();
    assert!(report.overall);
    for r in &table.rows {
        assert!(r.gap_formulation < 1e-14);
        assert!(r.gap_heisenberg_const < 1e-12);
        assert!((r.means[0].schrodinger - 1.0).abs() < 1e-14);
    }
}

#[test]
fn maximally_mixed_ensemble_has_half_purity() {
    let text = patched(
        "[{ \"weight\": 1.0, \"vector\": [[1, 0], [1, 0]] }]",
        "[{ \"weight\": 0.5, \"vector\": [[1, 0], [0, 0]] }, { \"weight\": 0.5, \"vector\": [[0, 0], [1, 0]] }]",
    );
    let (table, report) = run_evolve(&parse_config(&text, &tol()).unwrap()).unwrap();
    assert!(report.overall);
    for r in &table.rows {
        assert!((r.purity - 0.5).abs() < 1e-12);
        assert!((r.min_eig - 0.5).abs() < 1e-12);
    }
}

#[test]
fn evolve_report_has_every_check() {
    let (table, report) = run_evolve(&parse_config(MINIMAL, &tol()).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 101);
    let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "trace_preservation",
            "positivity",
            "hermiticity",
            "purity_drift",
            "formulation_gap",
            "picture_gap",
            "heisenberg_constancy",
            "integrator_hilbert",
            "integrator_bundle"
        ]
    );
    assert!(report.overall, "{}", report.summary());
}

#[test]
fn csv_layout() {
    let empty = TraceTable {
        observables: vec!["a".into(), "b".into()],
        rows: vec![],
    };
    assert_eq!(empty.to_csv().lines().count(), 1);
    assert_eq!(empty.header().len(), 5 + 3 * 2 + 3);
    assert_eq!(empty.header()[5], "a_schrodinger");

    let (table, _) = run_evolve(&parse_config(MINIMAL, &tol()).unwrap()).unwrap();
    let csv = table.to_csv();
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').count(), 5 + 3 + 3);
    }
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,1.0000000000000000e0,"));
}

#[test]
fn report_with_a_failure_fails_overall() {
    let mut r = InvariantReport::new("x");
    r.push("ok", 1e-12, 1e-9);
    assert!(r.overall);
    r.push("bad", 1e-3, 1e-9);
    r.push("nan", f64::NAN, 1e-9);
    assert!(!r.overall);
    assert_eq!(r.failures().count(), 2);
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["overall"], false);
    assert_eq!(json["checks"][1]["name"], "bad");
}

#[test]
fn curvature_needs_samples() {
    let cfg = parse_config(MINIMAL, &tol()).unwrap();
    assert!(matches!(run_curvature(&cfg), Err(BqmError::Validation { .. })));
}

#[test]
fn constant_hamiltonian_is_flat() {
    let text = patched("\"grid\"", "\"curvature\": { \"s\": [0.2], \"t\": [0.7] }, \"grid\"");
    let out = run_curvature(&parse_config(&text, &tol()).unwrap()).unwrap();
    assert!(out.flatness.flat);
    assert!(out.report.overall, "{}", out.report.summary());
    assert!(out.report.check("flat_frame_gamma").is_some());
    assert_eq!(out.to_csv().lines().count(), 2);
}

#[test]
fn verify_rejects_bad_arguments() {
    assert!(matches!(run_verify(0, 0, &[2]), Err(BqmError::Contract(_))));
    assert!(run_verify(0, 1, &[]).is_err());
    assert!(run_verify(0, 1, &[1]).is_err());
}

#[test]
fn verify_single_trial_passes_and_is_deterministic() {
    let a = run_verify(5, 2, &[2, 3]).unwrap();
    assert!(a.overall, "{}", a.summary());
    assert_eq!(a.to_json(), run_verify(5, 2, &[2, 3]).unwrap().to_json());
    assert_eq!(a.scenario, "verify(seed=5,trials=2,dims=2,3)");
}

#[test]
fn flipped_connection_fails_the_derivation_check() {
    let opts = VerifyOptions { flip_gamma_sign: true };
    let r = run_verify_with(1, 1, &[2], &opts).unwrap();
    assert!(!r.overall);
    assert!(!r.check("bundle.derivation_annihilation").unwrap().pass);
}
