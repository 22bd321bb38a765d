//! Hilbert-bundle description along observer paths.
//!
//! Fibre quantities are expressed in fibre coordinates and related to the
//! reference space by a [`FrameField`]. The evolution transport between two
//! fibres on a path is the frame-conjugated evolution operator; its local
//! generator gives the transport coefficients `Γ`, and `H^m = -i hbar Γ` is
//! the matrix-bundle Hamiltonian.

mod frames;
mod transport;

use std::fmt;
use std::sync::Arc;

pub use frames::FrameField;
pub use transport::{
    bundle_expectation, check_transport_section_system, density_morphism, density_morphism_from_ensemble,
    evolution_transport, integrate_bundle_liouville, lift_operator, morphism_derivation,
    propagate_density_morphism, transport_coefficients, unlift_density, Connection, SectionSystemReport,
};

use crate::error::{BqmError, Result};
use crate::hilbert::Interval;
use crate::linalg::{ComplexMatrix, C64};

/// Point of the base manifold. Only equality is meaningful.
#[derive(Clone, Debug, PartialEq)]
pub enum BasePoint {
    Named(String),
    Coords(Vec<f64>),
}

type PointOf = dyn Fn(f64) -> BasePoint + Send + Sync;

/// Observer path `γ: J → B`.
#[derive(Clone)]
pub struct Path {
    id: String,
    domain: Interval,
    point_of: Arc<PointOf>,
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Path")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl Path {
    pub fn new(
        id: impl Into<String>,
        domain: Interval,
        point_of: impl Fn(f64) -> BasePoint + Send + Sync + 'static,
    ) -> Self {
        Path {
            id: id.into(),
            domain,
            point_of: Arc::new(point_of),
        }
    }

    /// Path whose base point at time `t` is the coordinate tuple `(t)`.
    pub fn worldline(id: impl Into<String>, domain: Interval) -> Self {
        Path::new(id, domain, |t| BasePoint::Coords(vec![t]))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn point_at(&self, t: f64) -> BasePoint {
        (self.point_of)(t)
    }

    pub(crate) fn require_in_domain(&self, t: f64) -> Result<()> {
        if !self.domain.contains(t) {
            return Err(BqmError::contract(format!(
                "t = {t} lies outside the domain [{}, {}] of path `{}`",
                self.domain.start, self.domain.end, self.id
            )));
        }
        Ok(())
    }
}

type SectionValue = dyn Fn(f64) -> Result<Vec<C64>> + Send + Sync;

/// State section along a path, `t ↦ Ψ_γ(t)` in fibre coordinates.
#[derive(Clone)]
pub struct StateSection {
    pub path: Path,
    value_of: Arc<SectionValue>,
}

impl fmt::Debug for StateSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateSection").field("path", &self.path).finish_non_exhaustive()
    }
}

impl StateSection {
    pub fn new(path: Path, value_of: impl Fn(f64) -> Result<Vec<C64>> + Send + Sync + 'static) -> Self {
        StateSection {
            path,
            value_of: Arc::new(value_of),
        }
    }

    /// Constant fibre coordinates.
    pub fn constant(path: Path, psi: Vec<C64>) -> Self {
        StateSection::new(path, move |_| Ok(psi.clone()))
    }

    /// Fibre coordinates `l^{-1} ψ(t)` of a reference-space trajectory.
    pub fn from_reference(
        path: Path,
        frames: FrameField,
        psi: impl Fn(f64) -> Result<Vec<C64>> + Send + Sync + 'static,
    ) -> Self {
        let p = path.clone();
        StateSection::new(path, move |t| {
            let v = psi(t)?;
            let l = frames.frame(&p, t, v.len())?;
            Ok(l.adjoint().apply(&v))
        })
    }

    pub fn value(&self, t: f64) -> Result<Vec<C64>> {
        self.path.require_in_domain(t)?;
        (self.value_of)(t)
    }

    /// Reference-space vector `ψ(t) = l_{γ(t)} Ψ_γ(t)`.
    pub fn to_reference(&self, frames: &FrameField, t: f64) -> Result<Vec<C64>> {
        let v = self.value(t)?;
        Ok(frames.frame(&self.path, t, v.len())?.apply(&v))
    }
}

/// Frame-conjugated evolution operator between the fibres at `t_from` and
/// `t_to` of a path.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTransport {
    pub path_id: String,
    pub t_from: f64,
    pub t_to: f64,
    pub matrix: ComplexMatrix,
}

impl EvolutionTransport {
    pub fn inverse(&self) -> EvolutionTransport {
        EvolutionTransport {
            path_id: self.path_id.clone(),
            t_from: self.t_to,
            t_to: self.t_from,
            matrix: self.matrix.adjoint(),
        }
    }
}

/// Fibre endomorphism at one point of a path.
#[derive(Clone, Debug, PartialEq)]
pub struct MorphismValue {
    pub path_id: String,
    pub time: f64,
    pub matrix: ComplexMatrix,
}

/// Density morphism `Ρ_γ(t)`: a morphism that is Hermitian, positive and of
/// unit trace in fibre coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMorphism(pub MorphismValue);

impl DensityMorphism {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0.matrix
    }

    pub fn time(&self) -> f64 {
        self.0.time
    }

    pub fn path_id(&self) -> &str {
        &self.0.path_id
    }
}

/// Local coefficients `Γ_γ(t)` of the evolution transport.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportCoefficients {
    pub path_id: String,
    pub time: f64,
    pub gamma: ComplexMatrix,
}

impl TransportCoefficients {
    /// Matrix-bundle Hamiltonian `H^m = -i hbar Γ`.
    pub fn matrix_hamiltonian(&self, hbar: f64) -> ComplexMatrix {
        self.gamma.scale(C64::new(0.0, -hbar))
    }
}
