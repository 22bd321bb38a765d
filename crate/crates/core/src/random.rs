//! Seeded random instances: Gaussian matrices, Haar-like unitaries,
//! Hermitian generators and density operators.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), so a given seed
//! produces the same instances on every platform for a given build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{polar_reunitarize, ComplexMatrix, Tolerance, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a seed and a label.
pub fn rng_for(seed: u64, label: &str) -> SeededRng {
    // FNV-1a over the label, mixed into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h.rotate_left(17))
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn ginibre(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| gaussian(rng))
}

/// Unitary polar factor of a Ginibre matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        // A Ginibre draw is singular with probability zero; retry regardless.
        if let Ok(u) = polar_reunitarize(&ginibre(dim, rng), &Tolerance::default()) {
            return u;
        }
    }
}

/// Hermitian matrix with Frobenius norm `norm`.
pub fn random_hermitian(dim: usize, norm: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let h = ginibre(dim, rng).hermitian_part();
    let f = h.frobenius_norm();
    if f == 0.0 {
        return h;
    }
    h.scale_real(norm / f)
}

/// Full-rank density operator `G G^dagger / Tr(G G^dagger)`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let rho = (&g * &g.adjoint()).hermitian_part();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

pub fn random_vector(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..dim).map(|_| gaussian(rng)).collect()
}

/// Positive weights summing to one.
pub fn random_weights(count: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}
