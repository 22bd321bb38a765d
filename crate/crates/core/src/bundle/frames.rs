use std::fmt;
use std::sync::Arc;

use super::{BasePoint, Path};
use crate::error::{BqmError, Result};
use crate::hilbert::PropagatorLattice;
use crate::linalg::{ComplexMatrix, Tolerance, C64, I};
use crate::random::{random_hermitian, random_unitary, rng_for};

type PathTimeFrame = dyn Fn(&Path, f64, usize) -> Result<ComplexMatrix> + Send + Sync;
type PointFrame = dyn Fn(&BasePoint, usize) -> Result<ComplexMatrix> + Send + Sync;

#[derive(Clone)]
enum Kind {
    Identity,
    PathTime(Arc<PathTimeFrame>),
    PointBased(Arc<PointFrame>),
}

/// Unitary trivializations `l`, mapping fibre coordinates to reference-space
/// coordinates.
///
/// A frame field is either keyed by `(path, time)` or, in point-based mode,
/// by the base point `path(t)` alone, so that a path revisiting a point sees
/// the same frame there.
#[derive(Clone)]
pub struct FrameField {
    kind: Kind,
    label: String,
}

impl fmt::Debug for FrameField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrameField({})", self.label)
    }
}

impl FrameField {
    pub fn identity() -> Self {
        FrameField {
            kind: Kind::Identity,
            label: "identity".into(),
        }
    }

    /// Frames given by an arbitrary `(path, time, dim)` evaluator.
    pub fn from_path_time(
        label: impl Into<String>,
        f: impl Fn(&Path, f64, usize) -> Result<ComplexMatrix> + Send + Sync + 'static,
    ) -> Self {
        FrameField {
            kind: Kind::PathTime(Arc::new(f)),
            label: label.into(),
        }
    }

    /// Point-based frames given by a `(base point, dim)` evaluator.
    pub fn from_points(
        label: impl Into<String>,
        f: impl Fn(&BasePoint, usize) -> Result<ComplexMatrix> + Send + Sync + 'static,
    ) -> Self {
        FrameField {
            kind: Kind::PointBased(Arc::new(f)),
            label: label.into(),
        }
    }

    /// Smooth seeded frames `l(t) = W exp(i t K)` with `W` Haar-like and `K`
    /// a unit-norm Hermitian generator, both drawn per path.
    pub fn random_smooth(seed: u64) -> Self {
        FrameField::from_path_time(format!("random-smooth(seed={seed})"), move |path, t, dim| {
            let mut rng = rng_for(seed, &format!("frames/{}/{dim}", path.id()));
            let w = random_unitary(dim, &mut rng);
            let k = random_hermitian(dim, 1.0, &mut rng);
            Ok(&w * &k.scale(I * t).exp()?)
        })
    }

    /// Point-based seeded frames. Named points get independent Haar-like
    /// unitaries; coordinate points get `W exp(i sum_k x_k K_k)`, which is
    /// smooth in the coordinates.
    pub fn random_points(seed: u64) -> Self {
        FrameField::from_points(format!("random-points(seed={seed})"), move |point, dim| match point {
            BasePoint::Named(name) => Ok(random_unitary(dim, &mut rng_for(seed, &format!("point/{name}/{dim}")))),
            BasePoint::Coords(x) => {
                let mut rng = rng_for(seed, &format!("coords/{dim}"));
                let w = random_unitary(dim, &mut rng);
                let mut gen = ComplexMatrix::zeros(dim);
                for &xk in x {
                    gen += &random_hermitian(dim, 1.0, &mut rng).scale_real(xk);
                }
                Ok(&w * &gen.scale(I).exp()?)
            }
        })
    }

    /// Co-moving frames `l(t) = U(t, t_ref)`, independent of the path.
    pub fn co_moving(lattice: Arc<PropagatorLattice>, t_ref: f64) -> Self {
        FrameField::from_path_time(format!("co-moving(t_ref={t_ref})"), move |_, t, dim| {
            let u = lattice.propagator(t, t_ref)?;
            if u.matrix.dim() != dim {
                return Err(BqmError::Shape {
                    expected: dim,
                    found: u.matrix.dim(),
                });
            }
            Ok(u.matrix)
        })
    }

    /// `l(t) = diag(exp(i * rate * t * phases_k))`.
    pub fn diagonal_phase(phases: Vec<f64>, rate: f64) -> Self {
        FrameField::from_path_time(format!("diagonal-phase(rate={rate})"), move |_, t, dim| {
            if phases.len() != dim {
                return Err(BqmError::Shape {
                    expected: dim,
                    found: phases.len(),
                });
            }
            let d: Vec<C64> = phases.iter().map(|p| (I * (rate * t * p)).exp()).collect();
            Ok(ComplexMatrix::diagonal(&d))
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    pub fn is_point_based(&self) -> bool {
        matches!(self.kind, Kind::PointBased(_))
    }

    /// `l_{path(t)}`, checked for unitarity.
    pub fn frame(&self, path: &Path, t: f64, dim: usize) -> Result<ComplexMatrix> {
        path.require_in_domain(t)?;
        let l = match &self.kind {
            Kind::Identity => return Ok(ComplexMatrix::identity(dim)),
            Kind::PathTime(f) => f(path, t, dim)?,
            Kind::PointBased(f) => f(&path.point_at(t), dim)?,
        };
        if l.dim() != dim {
            return Err(BqmError::Shape {
                expected: dim,
                found: l.dim(),
            });
        }
        let tol = Tolerance::default().scaled(100.0);
        if !l.is_unitary(&tol) {
            return Err(BqmError::contract(format!(
                "frame {} at {} on path `{}` is not unitary (residual {:e})",
                self.label,
                t,
                path.id(),
                l.unitarity_residual()
            )));
        }
        Ok(l)
    }
}
