use std::path::Path as FsPath;

use serde::Serialize;

use super::config::{FrameSpec, ScenarioConfig};
use super::evolve::setup;
use super::report::{fmt_f64, write_file, write_report, InvariantReport};
use crate::bundle::{evolution_transport, lift_operator, transport_coefficients, FrameField};
use crate::curvature::{curvature_table, flat_frame, is_flat, CurvatureRow, TwoParamFamily, MAX_FLATNESS_SAMPLES};
use crate::error::{BqmError, Result};
use crate::hilbert::PropagatorLattice;
use crate::linalg::ComplexMatrix;

/// Numbers from the flat-frame verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatFrameSummary {
    pub max_gamma: f64,
    pub max_transport_gap: f64,
    /// Smallest `||l^{-1} H l|| - ||H||`; should not be negative.
    pub min_lifted_hamiltonian_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlatnessSummary {
    pub flat: bool,
    pub max_commutator_norm: f64,
    pub witness: Option<(f64, f64)>,
    pub flat_frame: Option<FlatFrameSummary>,
}

#[derive(Clone, Debug)]
pub struct CurvatureOutcome {
    pub dim: usize,
    pub rows: Vec<CurvatureRow>,
    pub flatness: FlatnessSummary,
    pub report: InvariantReport,
}

impl CurvatureOutcome {
    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = ["s", "t", "fd_norm", "commutator_norm", "gap"].map(String::from).to_vec();
        for i in 0..self.dim {
            for j in 0..self.dim {
                header.push(format!("r_{i}_{j}_re"));
                header.push(format!("r_{i}_{j}_im"));
            }
        }
        let mut out = header.join(",");
        out.push('\n');
        for r in &self.rows {
            let mut fields = vec![r.s, r.t, r.fd.frobenius_norm(), r.commutator.frobenius_norm(), r.gap];
            for z in r.fd.as_slice() {
                fields.extend([z.re, z.im]);
            }
            let line: Vec<String> = fields.into_iter().map(fmt_f64).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn flatness_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.flatness).expect("flatness serializes");
        s.push('\n');
        s
    }
}

/// Grid points used for the flatness scan and flat-frame probes.
fn samples(cfg: &ScenarioConfig, max: usize) -> Vec<f64> {
    let g = &cfg.grid;
    let stride = g.steps / (max - 1) + 1;
    let mut xs: Vec<f64> = (0..=g.steps).step_by(stride).map(|k| g.time(k)).collect();
    if !g.steps.is_multiple_of(stride) {
        xs.push(g.t1);
    }
    xs
}

/// Curvature table over the configured `(s, t)` samples, flatness verdict
/// and, for flat families, the flat-frame check.
pub fn run_curvature(cfg: &ScenarioConfig) -> Result<CurvatureOutcome> {
    run(cfg).map_err(|e| e.with_context(&format!("scenario `{}`", cfg.name)))
}

fn run(cfg: &ScenarioConfig) -> Result<CurvatureOutcome> {
    let spec = cfg
        .curvature
        .as_ref()
        .ok_or_else(|| BqmError::validation("curvature", "curvature runs need `s` and `t` samples"))?;
    let frames = match &cfg.frames {
        FrameSpec::Identity => FrameField::identity(),
        FrameSpec::RandomUnitary { seed } => FrameField::random_points(*seed),
        _ => {
            return Err(BqmError::validation(
                "frames.kind",
                "curvature runs need identity or random-unitary frames",
            ))
        }
    };
    let s = setup(cfg)?;
    let thr = &cfg.tolerances;
    let domain = cfg.domain();
    let family = TwoParamFamily::coordinate_square(domain, domain, s.hamiltonian.clone(), frames)?;
    let rows = curvature_table(&family, &spec.s, &spec.t, spec.h_step, &s.physics)?;

    let mut report = InvariantReport::new(cfg.name.clone());
    report.push(
        "curvature_fd_vs_commutator",
        rows.iter().map(|r| r.gap).fold(0.0, f64::max),
        thr.curvature_gap,
    );

    let scan = is_flat(&s.hamiltonian, &samples(cfg, MAX_FLATNESS_SAMPLES), thr.flat_commutator)?;
    let mut flatness = FlatnessSummary {
        flat: scan.flat,
        max_commutator_norm: scan.max_norm,
        witness: scan.witness(),
        flat_frame: None,
    };
    if scan.flat {
        report.push(
            "flat_curvature_norm",
            rows.iter().map(|r| r.fd.frobenius_norm()).fold(0.0, f64::max),
            thr.flat,
        );
        let flat = flat_frame(&s.hamiltonian, &s.path, &cfg.grid, &s.physics)?;
        let lattice: &PropagatorLattice = &s.lattice;
        let mut summary = FlatFrameSummary {
            max_gamma: 0.0,
            max_transport_gap: 0.0,
            min_lifted_hamiltonian_margin: f64::INFINITY,
        };
        let identity = ComplexMatrix::identity(cfg.dim);
        for t in samples(cfg, 101) {
            let g = transport_coefficients(&s.hamiltonian, &flat, &s.path, t, 1e-4, &s.physics)?;
            summary.max_gamma = summary.max_gamma.max(g.gamma.frobenius_norm());
            let tr = evolution_transport(lattice, &flat, &s.path, t, cfg.grid.t0)?;
            summary.max_transport_gap = summary.max_transport_gap.max(tr.matrix.distance(&identity));
            let h = s.hamiltonian.at(t);
            let lifted = lift_operator(&h, &flat, &s.path, t)?;
            let margin = lifted.matrix.frobenius_norm() - h.frobenius_norm();
            summary.min_lifted_hamiltonian_margin = summary.min_lifted_hamiltonian_margin.min(margin);
        }
        report.push("flat_frame_gamma", summary.max_gamma, thr.flat);
        report.push("flat_frame_transport", summary.max_transport_gap, thr.flat);
        report.push("flat_frame_lifted_hamiltonian", (-summary.min_lifted_hamiltonian_margin).max(0.0), thr.flat);
        flatness.flat_frame = Some(summary);
    } else {
        // Noncommuting samples must show up as curvature of comparable size.
        let shortfall = rows
            .iter()
            .map(|r| (0.5 * r.commutator.frobenius_norm() - r.fd.frobenius_norm()).max(0.0))
            .fold(0.0, f64::max);
        report.push("nonflat_curvature_detected", shortfall, 0.0);
    }
    Ok(CurvatureOutcome {
        dim: cfg.dim,
        rows,
        flatness,
        report,
    })
}

/// Writes the curvature table, the flatness summary and the report.
pub fn write_curvature(outcome: &CurvatureOutcome, out_dir: &FsPath, cfg: &ScenarioConfig) -> Result<()> {
    write_file(out_dir, &cfg.outputs.curvature, &outcome.to_csv())?;
    write_file(out_dir, &cfg.outputs.flatness, &outcome.flatness_json())?;
    write_report(&outcome.report, out_dir, &cfg.outputs.report)
}
