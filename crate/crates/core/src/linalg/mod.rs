//! Dense complex matrices and the handful of factorizations the rest of the
//! engine is built on.
//!
//! Everything here works on small square matrices (dimension at most
//! [`MAX_DIM`]) stored row-major. Values are immutable in practice: every
//! operation returns a fresh matrix.

mod eigh;
mod expm;
mod polar;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{BqmError, Result};

pub use eigh::{hermitian_eigensystem, Eigensystem};
pub use expm::{matrix_exponential, ExpmConfig};
pub use polar::polar_reunitarize;

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Absolute/relative tolerance pair.
///
/// A deviation `d` measured against an operand of size `s` is accepted when
/// `d <= max(abs, rel * s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        let ok = abs.is_finite() && rel.is_finite() && abs >= 0.0 && rel >= 0.0;
        if !ok || (abs == 0.0 && rel == 0.0) {
            return Err(BqmError::contract(format!(
                "tolerance needs abs, rel >= 0 with at least one positive (got abs={abs}, rel={rel})"
            )));
        }
        Ok(Tolerance { abs, rel })
    }

    /// Same value for the absolute and relative parts.
    pub fn uniform(value: f64) -> Result<Self> {
        Tolerance::new(value, value)
    }

    pub fn bound(&self, scale: f64) -> f64 {
        self.abs.max(self.rel * scale)
    }

    pub fn accepts(&self, deviation: f64, scale: f64) -> bool {
        deviation <= self.bound(scale)
    }

    pub fn scaled(&self, factor: f64) -> Tolerance {
        Tolerance {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-10,
        }
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(BqmError::contract(format!(
            "matrix dimension must lie in 1..={MAX_DIM}, got {dim}"
        )));
    }
    Ok(())
}

impl ComplexMatrix {
    /// Build from row-major entries, rejecting bad sizes and non-finite values.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(BqmError::contract(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let m = ComplexMatrix { dim, data };
        if !m.is_finite() {
            return Err(BqmError::contract("matrix has non-finite entries"));
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(BqmError::contract(format!(
                "matrix is not square: {dim} rows but a row of length {}",
                bad.len()
            )));
        }
        ComplexMatrix::new(dim, rows.concat())
    }

    /// Build from real-valued rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }

    /// Build entry by entry. Panics on a dimension outside `1..=MAX_DIM`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "matrix dimension {dim} out of range");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix::from_fn(dim, |_, _| ZERO)
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        ComplexMatrix::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        ComplexMatrix::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `psi * phi^dagger`.
    pub fn outer(psi: &[C64], phi: &[C64]) -> Self {
        assert_eq!(psi.len(), phi.len(), "outer product of unequal lengths");
        ComplexMatrix::from_fn(psi.len(), |i, j| psi[i] * phi[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance. Panics on mismatched dimensions.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "distance between unequal dimensions");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.distance(&self.adjoint())
    }

    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).distance(&ComplexMatrix::identity(self.dim))
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        tol.accepts(self.hermiticity_residual(), self.frobenius_norm())
    }

    pub fn is_unitary(&self, tol: &Tolerance) -> bool {
        tol.accepts(self.unitarity_residual(), (self.dim as f64).sqrt())
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// `U A U^dagger`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// `U^dagger A U`.
    pub fn conjugate_by_adjoint(&self, u: &ComplexMatrix) -> Self {
        &(&u.adjoint() * self) * u
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "matrix-vector dimension mismatch");
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn ensure_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(BqmError::Shape {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn exp(&self) -> Result<Self> {
        matrix_exponential(self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product of unequal dimensions");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * n..(k + 1) * n];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum of unequal dimensions");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "matrix sum of unequal dimensions");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference of unequal dimensions");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

/// `AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.ensure_same_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.trace()
}

/// Pauli matrices and a few other fixed qubit operators.
pub mod pauli {
    use super::{ComplexMatrix, C64, ONE, ZERO};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::new(2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::new(2, vec![ZERO, -super::I, super::I, ZERO]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::new(2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        ComplexMatrix::new(2, vec![h, h, h, -h]).unwrap()
    }
}
