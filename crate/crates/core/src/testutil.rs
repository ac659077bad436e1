//! Random fixtures shared by unit tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CVector, ComplexMatrix, HermitianMatrix};
use crate::objective::MeasurementSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut impl Rng) -> Complex64 {
    let re: f64 = r.sample(StandardNormal);
    let im: f64 = r.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector(r: &mut impl Rng, n: usize) -> CVector {
    (0..n).map(|_| gaussian(r)).collect()
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(r))
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> HermitianMatrix {
    HermitianMatrix::from_matrix(&random_matrix(r, n, n)).unwrap()
}

pub fn random_psd(r: &mut impl Rng, n: usize) -> HermitianMatrix {
    let a = random_matrix(r, n, n);
    HermitianMatrix::from_matrix(&a.mul(&a.adjoint())).unwrap()
}

/// Random probes with intensities from random planted rows plus noise.
pub fn random_measurements(r: &mut impl Rng, dim: usize, n: usize, rows: usize, lambda: f64) -> MeasurementSet {
    let probes: Vec<CVector> = (0..n).map(|_| random_vector(r, dim)).collect();
    let intensities = (0..rows)
        .map(|_| {
            let h = random_vector(r, dim);
            probes
                .iter()
                .map(|x| {
                    let noise: f64 = r.sample(StandardNormal);
                    crate::linalg::dot(&h, x).norm_sqr() + 0.1 * noise
                })
                .collect()
        })
        .collect();
    MeasurementSet::new(dim, lambda, probes, intensities).unwrap()
}
