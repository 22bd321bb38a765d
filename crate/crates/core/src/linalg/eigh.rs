use super::{ComplexMatrix, Tolerance, C64, ZERO};
use crate::error::{BqmError, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix: `H = V diag(values) V^dagger`.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Ascending.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::real_diagonal(&self.values);
        d.conjugate_by(&self.vectors)
    }

    /// `V f(diag) V^dagger`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = ComplexMatrix::real_diagonal(&self.values.iter().map(|&x| f(x)).collect::<Vec<_>>());
        d.conjugate_by(&self.vectors)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// The input must be Hermitian within `tol`; only its Hermitian part is
/// diagonalized. Eigenvectors are re-orthonormalized afterwards so degenerate
/// spectra still yield a unitary `V`.
pub fn hermitian_eigensystem(h: &ComplexMatrix, tol: &Tolerance) -> Result<Eigensystem> {
    let residual = h.hermiticity_residual();
    if !tol.accepts(residual, h.frobenius_norm()) {
        return Err(BqmError::contract(format!(
            "eigensystem requested for a non-Hermitian matrix (||H - H^dagger|| = {residual:e})"
        )));
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = n == 1 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(BqmError::numeric(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    orthonormalize_columns(&mut vectors);
    Ok(Eigensystem { values, vectors })
}

/// Zero the `(p, q)` entry of the Hermitian working matrix.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let beta = apq.norm();
    if beta == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Phase e^{-i phi} on column q makes the 2x2 block real symmetric.
    let phase = (apq / beta).conj();
    let tau = (aqq - app) / (2.0 * beta);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Block of G = diag(1, phase) * [[c, s], [-s, c]].
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase * (-s);
    let g_qq = phase * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Modified Gram-Schmidt over the columns, in place.
pub(crate) fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let n = m.dim();
    for j in 0..n {
        for k in 0..j {
            let proj: C64 = (0..n).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
            for i in 0..n {
                let mik = m[(i, k)];
                m[(i, j)] -= proj * mik;
            }
        }
        let norm = (0..n).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                m[(i, j)] /= norm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn pauli_z_spectrum() {
        let es = hermitian_eigensystem(&pauli::z(), &tol()).unwrap();
        assert_eq!(es.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum_matches_characteristic_polynomial() {
        // λ² - tr λ + det = λ² - 1 for σx.
        let es = hermitian_eigensystem(&pauli::x(), &tol()).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
        assert!(es.reconstruct().distance(&pauli::x()) < 1e-14);
    }

    #[test]
    fn scalar_matrix_is_degenerate() {
        let es = hermitian_eigensystem(&ComplexMatrix::identity(2).scale_real(0.5), &tol()).unwrap();
        assert_eq!(es.values, vec![0.5, 0.5]);
        assert!(es.vectors.unitarity_residual() < 1e-15);
    }

    #[test]
    fn general_hermitian_reconstructs() {
        let h = ComplexMatrix::from_fn(6, |i, j| {
            C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3)
        })
        .hermitian_part();
        let es = hermitian_eigensystem(&h, &tol()).unwrap();
        assert!(es.reconstruct().distance(&h) < 1e-12);
        assert!(es.vectors.unitarity_residual() < 1e-13);
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::new(2, vec![ZERO, C64::new(1.0, 0.0), ZERO, ZERO]).unwrap();
        assert!(matches!(hermitian_eigensystem(&a, &tol()), Err(BqmError::Contract(_))));
    }
}
