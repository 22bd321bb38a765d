use super::{hermitian_eigensystem, ComplexMatrix, Tolerance};
use crate::error::{BqmError, Result};

/// Unitary polar factor `M (M^dagger M)^{-1/2}`: the unitary closest to `M`
/// in Frobenius distance.
pub fn polar_reunitarize(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let gram = (&m.adjoint() * m).hermitian_part();
    let es = hermitian_eigensystem(&gram, &Tolerance::default())?;
    let largest = es.max().max(0.0);
    let smallest = es.min();
    // Singular values are square roots of the Gram spectrum.
    if largest == 0.0 || smallest <= 0.0 || smallest.sqrt() <= tol.bound(largest.sqrt()) {
        return Err(BqmError::numeric(format!(
            "polar factor of a (numerically) singular matrix: sigma_min = {:e}, sigma_max = {:e}",
            smallest.max(0.0).sqrt(),
            largest.sqrt()
        )));
    }
    let inv_sqrt = es.map_values(|x| 1.0 / x.sqrt());
    Ok(m * &inv_sqrt)
}
