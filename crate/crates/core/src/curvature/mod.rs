//! Curvature of the evolution transport over two-parameter families of
//! observers, the flatness test and flat (co-moving) frames.
//!
//! For a family `η(s, t)` the transport coefficients along the coordinate
//! lines `η(s, ·)` and `η(·, t)` are `Γ_t(s, t)` and `Γ_s(s, t)`. Both use the
//! same Hamiltonian family, evaluated at the parameter that moves. The
//! curvature is
//!
//! ```text
//! R(s, t) = ∂_s Γ_t - ∂_t Γ_s + Γ_s Γ_t - Γ_t Γ_s
//! ```
//!
//! which in identity frames reduces to `-[H(s), H(t)] / hbar^2`.

use std::fmt;
use std::sync::Arc;

use crate::bundle::{BasePoint, Connection, FrameField, Path};
use crate::error::{BqmError, Result};
use crate::hilbert::{HamiltonianFamily, Interval, PhysicsConfig, PropagatorLattice, TimeGrid};
use crate::linalg::{commutator, ComplexMatrix};

#[cfg(test)]
mod tests;

/// Default outer finite-difference step.
pub const DEFAULT_H_STEP: f64 = 1e-3;
/// Default inner step used for the transport coefficients themselves.
pub const DEFAULT_INNER_FD: f64 = 1e-4;
/// Most sample points used by [`flat_frame`] for its flatness scan.
pub const MAX_FLATNESS_SAMPLES: usize = 256;

type PointOf2 = dyn Fn(f64, f64) -> BasePoint + Send + Sync;

/// `η: J × J' → B` together with the Hamiltonian family and the point-based
/// frames used along it.
#[derive(Clone)]
pub struct TwoParamFamily {
    s_domain: Interval,
    t_domain: Interval,
    point_of: Arc<PointOf2>,
    hamiltonian: HamiltonianFamily,
    frames: FrameField,
    inner_fd: f64,
}

impl fmt::Debug for TwoParamFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoParamFamily")
            .field("s_domain", &self.s_domain)
            .field("t_domain", &self.t_domain)
            .field("frames", &self.frames)
            .finish_non_exhaustive()
    }
}

impl TwoParamFamily {
    /// Frames must be point-based (or identity), so both coordinate lines see
    /// the same frame at a shared point.
    pub fn new(
        s_domain: Interval,
        t_domain: Interval,
        point_of: impl Fn(f64, f64) -> BasePoint + Send + Sync + 'static,
        hamiltonian: HamiltonianFamily,
        frames: FrameField,
    ) -> Result<Self> {
        if !(frames.is_identity() || frames.is_point_based()) {
            return Err(BqmError::contract(format!(
                "frames `{}` are keyed by path and time; a two-parameter family needs point-based frames",
                frames.label()
            )));
        }
        let hd = hamiltonian.domain();
        for (name, d) in [("s", s_domain), ("t", t_domain)] {
            if d.start < hd.start || d.end > hd.end {
                return Err(BqmError::contract(format!(
                    "{name} domain [{}, {}] is not covered by the Hamiltonian domain [{}, {}]",
                    d.start, d.end, hd.start, hd.end
                )));
            }
        }
        Ok(TwoParamFamily {
            s_domain,
            t_domain,
            point_of: Arc::new(point_of),
            hamiltonian,
            frames,
            inner_fd: DEFAULT_INNER_FD,
        })
    }

    /// The square `J × J'` embedded as coordinate points `(s, t)`.
    pub fn coordinate_square(
        s_domain: Interval,
        t_domain: Interval,
        hamiltonian: HamiltonianFamily,
        frames: FrameField,
    ) -> Result<Self> {
        TwoParamFamily::new(s_domain, t_domain, |s, t| BasePoint::Coords(vec![s, t]), hamiltonian, frames)
    }

    pub fn with_inner_fd(mut self, inner_fd: f64) -> Self {
        self.inner_fd = inner_fd;
        self
    }

    pub fn hamiltonian(&self) -> &HamiltonianFamily {
        &self.hamiltonian
    }

    pub fn frames(&self) -> &FrameField {
        &self.frames
    }

    pub fn s_domain(&self) -> Interval {
        self.s_domain
    }

    pub fn t_domain(&self) -> Interval {
        self.t_domain
    }

    pub fn point(&self, s: f64, t: f64) -> BasePoint {
        (self.point_of)(s, t)
    }

    /// Coordinate line `t ↦ η(s, t)`.
    pub fn t_line(&self, s: f64) -> Path {
        let p = self.point_of.clone();
        Path::new(format!("eta(s={s:e},.)"), self.t_domain, move |t| p(s, t))
    }

    /// Coordinate line `s ↦ η(s, t)`.
    pub fn s_line(&self, t: f64) -> Path {
        let p = self.point_of.clone();
        Path::new(format!("eta(.,t={t:e})"), self.s_domain, move |s| p(s, t))
    }

    /// Frame at the point `η(s, t)`.
    pub fn frame_at(&self, s: f64, t: f64) -> Result<ComplexMatrix> {
        self.frames.frame(&self.t_line(s), t, self.hamiltonian.dim())
    }

    fn connection(&self, path: Path, cfg: &PhysicsConfig) -> Connection {
        Connection::new(self.hamiltonian.clone(), self.frames.clone(), path, *cfg).with_fd_step(self.inner_fd)
    }

    /// `Γ_t(s, t)`: coefficients along `η(s, ·)` at parameter `t`.
    pub fn gamma_t(&self, s: f64, t: f64, cfg: &PhysicsConfig) -> Result<ComplexMatrix> {
        Ok(self.connection(self.t_line(s), cfg).coefficients(t)?.gamma)
    }

    /// `Γ_s(s, t)`: coefficients along `η(·, t)` at parameter `s`.
    pub fn gamma_s(&self, s: f64, t: f64, cfg: &PhysicsConfig) -> Result<ComplexMatrix> {
        Ok(self.connection(self.s_line(t), cfg).coefficients(s)?.gamma)
    }
}

/// Curvature matrix at `(s, t)`, in inverse-time-squared units.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureValue {
    pub matrix: ComplexMatrix,
    pub s: f64,
    pub t: f64,
}

fn central(f: impl Fn(f64) -> Result<ComplexMatrix>, x: f64, h: f64) -> Result<ComplexMatrix> {
    Ok((&f(x + h)? - &f(x - h)?).scale_real(0.5 / h))
}

/// Central difference with one Richardson step: `(4 D(h/2) - D(h)) / 3`.
fn richardson(f: impl Fn(f64) -> Result<ComplexMatrix>, x: f64, h: f64) -> Result<ComplexMatrix> {
    let coarse = central(&f, x, h)?;
    let fine = central(&f, x, 0.5 * h)?;
    Ok((&fine.scale_real(4.0) - &coarse).scale_real(1.0 / 3.0))
}

/// Curvature of the evolution transport by finite differences of the
/// transport coefficients along the two coordinate lines.
pub fn curvature_fd(fam: &TwoParamFamily, s: f64, t: f64, h_step: f64, cfg: &PhysicsConfig) -> Result<CurvatureValue> {
    if !(h_step.is_finite() && h_step > 0.0) {
        return Err(BqmError::contract(format!("h_step must be positive, got {h_step}")));
    }
    let margin = h_step + fam.inner_fd;
    if !fam.s_domain.contains_with_margin(s, margin) || !fam.t_domain.contains_with_margin(t, margin) {
        return Err(BqmError::contract(format!(
            "curvature at ({s}, {t}) needs a margin of {margin} inside [{}, {}] x [{}, {}]",
            fam.s_domain.start, fam.s_domain.end, fam.t_domain.start, fam.t_domain.end
        )));
    }
    let ds_gamma_t = richardson(|x| fam.gamma_t(x, t, cfg), s, h_step)?;
    let dt_gamma_s = richardson(|y| fam.gamma_s(s, y, cfg), t, h_step)?;
    let gs = fam.gamma_s(s, t, cfg)?;
    let gt = fam.gamma_t(s, t, cfg)?;
    let matrix = &(&ds_gamma_t - &dt_gamma_s) + &commutator(&gs, &gt)?;
    Ok(CurvatureValue { matrix, s, t })
}

/// `-[H(s), H(t)] / hbar^2`, the curvature in identity frames.
pub fn curvature_commutator(h: &HamiltonianFamily, s: f64, t: f64, cfg: &PhysicsConfig) -> Result<CurvatureValue> {
    h.require_in_domain(s, "curvature parameter s")?;
    h.require_in_domain(t, "curvature parameter t")?;
    let c = commutator(&h.at(s), &h.at(t))?;
    Ok(CurvatureValue {
        matrix: c.scale_real(-1.0 / (cfg.hbar * cfg.hbar)),
        s,
        t,
    })
}

/// The commutator form seen in the frame at `η(s, t)`: `l^{-1} R l`.
pub fn curvature_commutator_in_frame(
    fam: &TwoParamFamily,
    s: f64,
    t: f64,
    cfg: &PhysicsConfig,
) -> Result<CurvatureValue> {
    let r = curvature_commutator(&fam.hamiltonian, s, t, cfg)?;
    let l = fam.frame_at(s, t)?;
    Ok(CurvatureValue {
        matrix: r.matrix.conjugate_by_adjoint(&l),
        ..r
    })
}

/// Result of scanning a Hamiltonian family for commuting values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flatness {
    pub flat: bool,
    /// Largest `||[H(s), H(t)]||` over the sampled pairs.
    pub max_norm: f64,
    /// Pair attaining `max_norm`.
    pub worst_pair: (f64, f64),
}

impl Flatness {
    /// The maximizing pair, reported only when the family is not flat.
    pub fn witness(&self) -> Option<(f64, f64)> {
        (!self.flat).then_some(self.worst_pair)
    }
}

/// `true` iff `||[H(s), H(t)]|| <= tol` for every pair of samples.
pub fn is_flat(h: &HamiltonianFamily, samples: &[f64], tol: f64) -> Result<Flatness> {
    if samples.len() < 2 {
        return Err(BqmError::contract(format!(
            "flatness needs at least two sample points, got {}",
            samples.len()
        )));
    }
    for &x in samples {
        h.require_in_domain(x, "flatness sample")?;
    }
    let values: Vec<ComplexMatrix> = samples.iter().map(|&x| h.at(x)).collect();
    let mut best = Flatness {
        flat: true,
        max_norm: 0.0,
        worst_pair: (samples[0], samples[1]),
    };
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let n = commutator(&values[i], &values[j])?.frobenius_norm();
            if n > best.max_norm {
                best.max_norm = n;
                best.worst_pair = (samples[i], samples[j]);
            }
        }
    }
    best.flat = best.max_norm <= tol;
    Ok(best)
}

/// Flatness threshold used by [`flat_frame`].
pub const FLAT_FRAME_TOL: f64 = 1e-8;

/// Co-moving frames `l(t) = U(t, t_ref)` with `t_ref = grid.t0`, in which the
/// transport is trivial. Fails with [`BqmError::NotFlat`] when the family is
/// not flat on the grid.
///
/// At most [`MAX_FLATNESS_SAMPLES`] evenly spaced grid points enter the
/// flatness scan.
pub fn flat_frame(h: &HamiltonianFamily, path: &Path, grid: &TimeGrid, cfg: &PhysicsConfig) -> Result<FrameField> {
    let d = path.domain();
    if !(d.contains(grid.t0) && d.contains(grid.t1)) {
        return Err(BqmError::contract(format!(
            "grid [{}, {}] is not inside the domain of path `{}`",
            grid.t0,
            grid.t1,
            path.id()
        )));
    }
    let stride = grid.steps / (MAX_FLATNESS_SAMPLES - 1) + 1;
    let mut samples: Vec<f64> = (0..=grid.steps).step_by(stride).map(|k| grid.time(k)).collect();
    if !grid.steps.is_multiple_of(stride) {
        samples.push(grid.t1);
    }
    if samples.len() < 2 {
        samples.push(grid.t1);
    }
    let verdict = is_flat(h, &samples, FLAT_FRAME_TOL)?;
    if !verdict.flat {
        let (s, t) = verdict.worst_pair;
        return Err(BqmError::NotFlat {
            s,
            t,
            norm: verdict.max_norm,
        });
    }
    let lattice = PropagatorLattice::new(h, cfg, 256.0)?;
    Ok(FrameField::co_moving(Arc::new(lattice), grid.t0))
}

/// One row of the fd-versus-commutator comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureRow {
    pub s: f64,
    pub t: f64,
    pub fd: ComplexMatrix,
    pub commutator: ComplexMatrix,
    pub gap: f64,
}

/// Compares [`curvature_fd`] with the frame-transformed commutator form on
/// every `(s, t)` pair.
pub fn curvature_table(
    fam: &TwoParamFamily,
    s_samples: &[f64],
    t_samples: &[f64],
    h_step: f64,
    cfg: &PhysicsConfig,
) -> Result<Vec<CurvatureRow>> {
    let mut rows = Vec::with_capacity(s_samples.len() * t_samples.len());
    for &s in s_samples {
        for &t in t_samples {
            let fd = curvature_fd(fam, s, t, h_step, cfg)?.matrix;
            let commutator = curvature_commutator_in_frame(fam, s, t, cfg)?.matrix;
            let gap = fd.distance(&commutator);
            rows.push(CurvatureRow {
                s,
                t,
                fd,
                commutator,
                gap,
            });
        }
    }
    Ok(rows)
}
