//! Finite-dimensional mixed-state quantum dynamics in two equivalent
//! formulations.
//!
//! The [`hilbert`] module is the textbook description: density operators
//! built from ensembles, the evolution operator, and the von Neumann
//! equation. The [`bundle`] module re-expresses the same dynamics along an
//! observer path using unitary frames: density morphisms, evolution
//! transports and their transport coefficients. [`pictures`] moves between
//! Schrödinger, Heisenberg and general rotating pictures, and [`curvature`]
//! measures the obstruction to flatness of the evolution transport.
//! [`scenario`] is the batch front end used by the `bqm` binary.

pub mod bundle;
pub mod curvature;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod pictures;
pub mod random;
pub mod scenario;

pub use error::{BqmError, Result};
pub use linalg::{ComplexMatrix, Tolerance, C64};
