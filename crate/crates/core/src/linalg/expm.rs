use super::{ComplexMatrix, C64};
use crate::error::{BqmError, Result};

/// Parameters of the scaling-and-squaring exponential.
#[derive(Clone, Copy, Debug)]
pub struct ExpmConfig {
    /// Degree of the truncated Taylor kernel.
    pub order: usize,
    /// The scaled matrix satisfies `||A / 2^s||_1 <= threshold`.
    pub threshold: f64,
    pub max_squarings: u32,
}

impl Default for ExpmConfig {
    fn default() -> Self {
        // 0.5^19 / 19! is far below double precision.
        ExpmConfig {
            order: 18,
            threshold: 0.5,
            max_squarings: 60,
        }
    }
}

/// Matrix exponential by scaling and squaring around a fixed-order Taylor
/// kernel.
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_exponential_with(a, &ExpmConfig::default())
}

pub fn matrix_exponential_with(a: &ComplexMatrix, cfg: &ExpmConfig) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(BqmError::numeric("exponential of a matrix with non-finite entries"));
    }
    let norm = a.one_norm();
    let mut squarings = 0u32;
    if norm > cfg.threshold {
        squarings = (norm / cfg.threshold).log2().ceil().max(0.0) as u32;
    }
    if squarings > cfg.max_squarings {
        return Err(BqmError::numeric(format!(
            "matrix exponential needs {squarings} squarings (norm {norm:e}), limit is {}",
            cfg.max_squarings
        )));
    }
    let scaled = a.scale_real(0.5f64.powi(squarings as i32));

    // Horner evaluation of sum_k X^k / k!.
    let n = a.dim();
    let id = ComplexMatrix::identity(n);
    let mut acc = id.clone();
    for k in (1..=cfg.order).rev() {
        acc = &(&scaled * &acc).scale(C64::new(1.0 / k as f64, 0.0)) + &id;
    }
    let last_term = scaled.one_norm().powi(cfg.order as i32 + 1)
        / (1..=cfg.order + 1).map(|k| k as f64).product::<f64>();
    if last_term > 1e-15 * acc.one_norm().max(1.0) {
        return Err(BqmError::numeric(format!(
            "Taylor kernel of order {} did not converge (remainder {last_term:e})",
            cfg.order
        )));
    }

    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    if !acc.is_finite() {
        return Err(BqmError::numeric("matrix exponential overflowed"));
    }
    Ok(acc)
}
