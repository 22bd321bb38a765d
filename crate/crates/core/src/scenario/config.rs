use std::collections::BTreeSet;
use std::path::Path as FsPath;

use serde::Deserialize;

use crate::error::{BqmError, Result};
use crate::hilbert::{Ensemble, EnsembleMember, HamiltonianFamily, Interval, StateVector, TimeGrid};
use crate::linalg::{ComplexMatrix, Tolerance, C64, MAX_DIM};

/// Extra time added on both sides of the grid for the Hamiltonian and path
/// domains, so central differences at the grid ends stay inside.
pub const DOMAIN_PADDING: f64 = 1.0;

const MAX_STEPS: usize = 1_000_000;

type RawComplex = [f64; 2];
type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    dim: usize,
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default)]
    seed: Option<u64>,
    hamiltonian: RawHamiltonian,
    ensemble: Vec<RawMember>,
    #[serde(default)]
    frames: RawFrames,
    #[serde(default)]
    picture: RawPicture,
    grid: RawGrid,
    #[serde(default)]
    observables: Vec<RawObservable>,
    #[serde(default)]
    tolerances: Thresholds,
    #[serde(default)]
    outputs: Outputs,
    #[serde(default)]
    curvature: Option<RawCurvature>,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawHamiltonian {
    Constant {
        matrix: RawMatrix,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        matrices: Vec<RawMatrix>,
    },
    HarmonicDrive {
        h0: RawMatrix,
        h1: RawMatrix,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    CustomTable {
        times: Vec<f64>,
        matrices: Vec<RawMatrix>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMember {
    weight: f64,
    vector: Vec<RawComplex>,
}

#[derive(Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawFrames {
    #[default]
    Identity,
    RandomUnitary {
        #[serde(default)]
        seed: Option<u64>,
    },
    CoMoving {
        #[serde(default)]
        t_ref: Option<f64>,
    },
    DiagonalPhase {
        phases: Vec<f64>,
        rate: f64,
    },
}

#[derive(Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawPicture {
    #[default]
    Schrodinger,
    Heisenberg {
        #[serde(default)]
        anchor: Option<f64>,
    },
    VFamily {
        #[serde(default)]
        anchor: Option<f64>,
        phases: Vec<f64>,
        omega: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    name: String,
    matrix: RawMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurvature {
    s: Vec<f64>,
    t: Vec<f64>,
    #[serde(default = "default_h_step")]
    h_step: f64,
}

fn default_h_step() -> f64 {
    crate::curvature::DEFAULT_H_STEP
}

/// Report thresholds. Every threshold in a report comes from here.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub trace: f64,
    pub positivity: f64,
    pub hermiticity: f64,
    pub purity_drift: f64,
    pub formulation: f64,
    pub picture: f64,
    pub heisenberg_constancy: f64,
    pub integrator: f64,
    pub curvature_gap: f64,
    pub flat: f64,
    pub flat_commutator: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            trace: 1e-9,
            positivity: 1e-9,
            hermiticity: 1e-10,
            purity_drift: 1e-8,
            formulation: 1e-9,
            picture: 1e-9,
            heisenberg_constancy: 1e-6,
            integrator: 1e-6,
            curvature_gap: 1e-4,
            flat: 1e-6,
            flat_commutator: 1e-8,
        }
    }
}

impl Thresholds {
    fn entries(&self) -> [(&'static str, f64); 11] {
        [
            ("trace", self.trace),
            ("positivity", self.positivity),
            ("hermiticity", self.hermiticity),
            ("purity_drift", self.purity_drift),
            ("formulation", self.formulation),
            ("picture", self.picture),
            ("heisenberg_constancy", self.heisenberg_constancy),
            ("integrator", self.integrator),
            ("curvature_gap", self.curvature_gap),
            ("flat", self.flat),
            ("flat_commutator", self.flat_commutator),
        ]
    }
}

/// Output file names, relative to the output directory.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub traces: String,
    pub report: String,
    pub curvature: String,
    pub flatness: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            traces: "traces.csv".into(),
            report: "report.json".into(),
            curvature: "curvature.csv".into(),
            flatness: "flatness.json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianSpec {
    Constant(ComplexMatrix),
    /// `matrices[k]` holds on `[breakpoints[k-1], breakpoints[k])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        matrices: Vec<ComplexMatrix>,
    },
    /// `H0 + cos(omega t + phase) H1`.
    HarmonicDrive {
        h0: ComplexMatrix,
        h1: ComplexMatrix,
        omega: f64,
        phase: f64,
    },
    /// Linear interpolation between tabulated values, constant outside.
    CustomTable {
        times: Vec<f64>,
        matrices: Vec<ComplexMatrix>,
    },
}

impl HamiltonianSpec {
    pub fn evaluate(&self, t: f64) -> ComplexMatrix {
        match self {
            HamiltonianSpec::Constant(h) => h.clone(),
            HamiltonianSpec::PiecewiseConstant { breakpoints, matrices } => {
                let k = breakpoints.partition_point(|&b| b <= t);
                matrices[k].clone()
            }
            HamiltonianSpec::HarmonicDrive { h0, h1, omega, phase } => h0 + &h1.scale_real((omega * t + phase).cos()),
            HamiltonianSpec::CustomTable { times, matrices } => {
                let k = times.partition_point(|&x| x <= t);
                if k == 0 {
                    return matrices[0].clone();
                }
                if k == times.len() {
                    return matrices[k - 1].clone();
                }
                let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                &matrices[k - 1].scale_real(1.0 - w) + &matrices[k].scale_real(w)
            }
        }
    }

    pub fn family(&self, domain: Interval, tol: &Tolerance) -> Result<HamiltonianFamily> {
        let spec = self.clone();
        let dim = self.evaluate(domain.start).dim();
        HamiltonianFamily::new(dim, domain, move |t| spec.evaluate(t), tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrameSpec {
    Identity,
    RandomUnitary { seed: u64 },
    CoMoving { t_ref: f64 },
    DiagonalPhase { phases: Vec<f64>, rate: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PictureSpec {
    Schrodinger,
    Heisenberg { anchor: f64 },
    VFamily { anchor: f64, phases: Vec<f64>, omega: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSpec {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub h_step: f64,
}

/// A fully validated scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub name: String,
    pub dim: usize,
    pub hbar: f64,
    pub hamiltonian: HamiltonianSpec,
    pub ensemble: Ensemble,
    pub frames: FrameSpec,
    pub picture: PictureSpec,
    pub grid: TimeGrid,
    pub observables: Vec<(String, ComplexMatrix)>,
    pub tolerances: Thresholds,
    pub outputs: Outputs,
    pub curvature: Option<CurvatureSpec>,
    /// Tolerance used to validate the inputs themselves.
    pub input_tolerance: Tolerance,
}

impl ScenarioConfig {
    /// Grid padded by [`DOMAIN_PADDING`] on both sides.
    pub fn domain(&self) -> Interval {
        Interval {
            start: self.grid.t0 - DOMAIN_PADDING,
            end: self.grid.t1 + DOMAIN_PADDING,
        }
    }
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> BqmError {
    BqmError::validation(field, reason)
}

fn finite(field: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(field, format!("must be finite, got {x}")))
    }
}

fn matrix(field: &str, raw: &RawMatrix, dim: usize) -> Result<ComplexMatrix> {
    if raw.len() != dim || raw.iter().any(|r| r.len() != dim) {
        return Err(invalid(field, format!("expected a {dim}x{dim} matrix of [re, im] pairs")));
    }
    let rows: Vec<Vec<C64>> = raw.iter().map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| invalid(field, e.to_string()))
}

fn hermitian(field: &str, raw: &RawMatrix, dim: usize, tol: &Tolerance) -> Result<ComplexMatrix> {
    let m = matrix(field, raw, dim)?;
    if !m.is_hermitian(tol) {
        return Err(invalid(
            field,
            format!("matrix is not Hermitian (residual {:e})", m.hermiticity_residual()),
        ));
    }
    Ok(m)
}

fn increasing(field: &str, xs: &[f64]) -> Result<()> {
    for (k, x) in xs.iter().enumerate() {
        finite(&format!("{field}[{k}]"), *x)?;
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(field, "values must be strictly increasing"));
    }
    Ok(())
}

fn phases(field: &str, xs: &[f64], dim: usize) -> Result<Vec<f64>> {
    if xs.len() != dim {
        return Err(invalid(field, format!("expected {dim} phases, got {}", xs.len())));
    }
    for (k, x) in xs.iter().enumerate() {
        finite(&format!("{field}[{k}]"), *x)?;
    }
    Ok(xs.to_vec())
}

fn in_domain(field: &str, x: f64, domain: Interval) -> Result<f64> {
    finite(field, x)?;
    if !domain.contains(x) {
        return Err(invalid(
            field,
            format!("{x} lies outside [{}, {}]", domain.start, domain.end),
        ));
    }
    Ok(x)
}

fn file_name(field: &str, name: &str) -> Result<()> {
    if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
        return Err(invalid(field, format!("`{name}` is not a plain file name")));
    }
    Ok(())
}

/// Parses and validates a JSON scenario document.
pub fn parse_config(text: &str, tol: &Tolerance) -> Result<ScenarioConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| BqmError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw, tol)
}

/// Reads, parses and validates a scenario file.
pub fn load_config(path: &FsPath, tol: &Tolerance) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| BqmError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, tol)
}

fn validate(raw: RawConfig, tol: &Tolerance) -> Result<ScenarioConfig> {
    if raw.name.trim().is_empty() {
        return Err(invalid("name", "must not be empty"));
    }
    let dim = raw.dim;
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(invalid("dim", format!("must lie in 1..={MAX_DIM}, got {dim}")));
    }
    if !(raw.hbar.is_finite() && raw.hbar > 0.0) {
        return Err(invalid("hbar", format!("must be positive and finite, got {}", raw.hbar)));
    }

    let g = &raw.grid;
    finite("grid.t0", g.t0)?;
    finite("grid.t1", g.t1)?;
    if g.t0 >= g.t1 {
        return Err(invalid("grid", format!("t0 = {} must be below t1 = {}", g.t0, g.t1)));
    }
    if !(1..=MAX_STEPS).contains(&g.steps) {
        return Err(invalid("grid.steps", format!("must lie in 1..={MAX_STEPS}, got {}", g.steps)));
    }
    let grid = TimeGrid::new(g.t0, g.t1, g.steps).map_err(|e| invalid("grid", e.to_string()))?;
    let domain = Interval {
        start: g.t0 - DOMAIN_PADDING,
        end: g.t1 + DOMAIN_PADDING,
    };

    let hamiltonian = match &raw.hamiltonian {
        RawHamiltonian::Constant { matrix } => HamiltonianSpec::Constant(hermitian("hamiltonian.matrix", matrix, dim, tol)?),
        RawHamiltonian::PiecewiseConstant { breakpoints, matrices } => {
            increasing("hamiltonian.breakpoints", breakpoints)?;
            if matrices.len() != breakpoints.len() + 1 {
                return Err(invalid(
                    "hamiltonian.matrices",
                    format!("expected {} matrices for {} breakpoints", breakpoints.len() + 1, breakpoints.len()),
                ));
            }
            HamiltonianSpec::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                matrices: matrices
                    .iter()
                    .enumerate()
                    .map(|(k, m)| hermitian(&format!("hamiltonian.matrices[{k}]"), m, dim, tol))
                    .collect::<Result<_>>()?,
            }
        }
        RawHamiltonian::HarmonicDrive { h0, h1, omega, phase } => HamiltonianSpec::HarmonicDrive {
            h0: hermitian("hamiltonian.h0", h0, dim, tol)?,
            h1: hermitian("hamiltonian.h1", h1, dim, tol)?,
            omega: finite("hamiltonian.omega", *omega)?,
            phase: finite("hamiltonian.phase", *phase)?,
        },
        RawHamiltonian::CustomTable { times, matrices } => {
            if times.is_empty() {
                return Err(invalid("hamiltonian.times", "must not be empty"));
            }
            increasing("hamiltonian.times", times)?;
            if matrices.len() != times.len() {
                return Err(invalid(
                    "hamiltonian.matrices",
                    format!("expected {} matrices, got {}", times.len(), matrices.len()),
                ));
            }
            HamiltonianSpec::CustomTable {
                times: times.clone(),
                matrices: matrices
                    .iter()
                    .enumerate()
                    .map(|(k, m)| hermitian(&format!("hamiltonian.matrices[{k}]"), m, dim, tol))
                    .collect::<Result<_>>()?,
            }
        }
    };

    if raw.ensemble.is_empty() {
        return Err(invalid("ensemble", "must contain at least one member"));
    }
    let mut members = Vec::with_capacity(raw.ensemble.len());
    for (k, m) in raw.ensemble.iter().enumerate() {
        let field = format!("ensemble[{k}]");
        if !(m.weight.is_finite() && (0.0..=1.0).contains(&m.weight)) {
            return Err(invalid(format!("{field}.weight"), format!("must lie in [0, 1], got {}", m.weight)));
        }
        if m.vector.len() != dim {
            return Err(invalid(format!("{field}.vector"), format!("expected {dim} components, got {}", m.vector.len())));
        }
        let v: Vec<C64> = m.vector.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid(format!("{field}.vector"), "must have a finite, nonzero norm"));
        }
        members.push(EnsembleMember {
            weight: m.weight,
            vector: StateVector(v),
        });
    }
    let total: f64 = members.iter().map(|m| m.weight).sum();
    if !tol.accepts((total - 1.0).abs(), 1.0) {
        return Err(invalid("ensemble", format!("weights sum to {total}, not 1")));
    }
    let ensemble = Ensemble::new(members);

    let frames = match &raw.frames {
        RawFrames::Identity => FrameSpec::Identity,
        RawFrames::RandomUnitary { seed } => FrameSpec::RandomUnitary {
            seed: seed
                .or(raw.seed)
                .ok_or_else(|| invalid("frames.seed", "random frames need a seed here or at the top level"))?,
        },
        RawFrames::CoMoving { t_ref } => FrameSpec::CoMoving {
            t_ref: in_domain("frames.t_ref", t_ref.unwrap_or(g.t0), domain)?,
        },
        RawFrames::DiagonalPhase { phases: p, rate } => FrameSpec::DiagonalPhase {
            phases: phases("frames.phases", p, dim)?,
            rate: finite("frames.rate", *rate)?,
        },
    };

    let picture = match &raw.picture {
        RawPicture::Schrodinger => PictureSpec::Schrodinger,
        RawPicture::Heisenberg { anchor } => PictureSpec::Heisenberg {
            anchor: in_domain("picture.anchor", anchor.unwrap_or(g.t0), domain)?,
        },
        RawPicture::VFamily { anchor, phases: p, omega } => PictureSpec::VFamily {
            anchor: in_domain("picture.anchor", anchor.unwrap_or(g.t0), domain)?,
            phases: phases("picture.phases", p, dim)?,
            omega: finite("picture.omega", *omega)?,
        },
    };

    let mut names = BTreeSet::new();
    let mut observables = Vec::with_capacity(raw.observables.len());
    for (k, o) in raw.observables.iter().enumerate() {
        let ok = !o.name.is_empty() && o.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok {
            return Err(invalid(
                format!("observables[{k}].name"),
                format!("`{}` must be non-empty and use only ASCII letters, digits, `_` or `-`", o.name),
            ));
        }
        if !names.insert(o.name.clone()) {
            return Err(invalid(format!("observables.{}", o.name), "duplicate observable name"));
        }
        let m = hermitian(&format!("observables.{}", o.name), &o.matrix, dim, tol)?;
        observables.push((o.name.clone(), m));
    }

    for (name, value) in raw.tolerances.entries() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(invalid(format!("tolerances.{name}"), format!("must be finite and non-negative, got {value}")));
        }
    }

    let o = &raw.outputs;
    file_name("outputs.traces", &o.traces)?;
    file_name("outputs.report", &o.report)?;
    file_name("outputs.curvature", &o.curvature)?;
    file_name("outputs.flatness", &o.flatness)?;

    let curvature = match &raw.curvature {
        None => None,
        Some(c) => {
            if !(c.h_step.is_finite() && c.h_step > 0.0 && c.h_step < 0.25) {
                return Err(invalid("curvature.h_step", format!("must lie in (0, 0.25), got {}", c.h_step)));
            }
            let span = grid.interval();
            for (axis, xs) in [("s", &c.s), ("t", &c.t)] {
                if xs.is_empty() {
                    return Err(invalid(format!("curvature.{axis}"), "must not be empty"));
                }
                for (k, &x) in xs.iter().enumerate() {
                    in_domain(&format!("curvature.{axis}[{k}]"), x, span)?;
                }
            }
            Some(CurvatureSpec {
                s: c.s.clone(),
                t: c.t.clone(),
                h_step: c.h_step,
            })
        }
    };

    Ok(ScenarioConfig {
        name: raw.name,
        dim,
        hbar: raw.hbar,
        hamiltonian,
        ensemble,
        frames,
        picture,
        grid,
        observables,
        tolerances: raw.tolerances,
        outputs: raw.outputs,
        curvature,
        input_tolerance: *tol,
    })
}
