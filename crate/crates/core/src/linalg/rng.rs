//! Seeded random generators. Every generator takes its seed (or RNG) explicitly.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{qf, DenseMatrix, DenseTensor};
use crate::error::{Error, Result};

/// Platform-stable RNG used across the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries drawn in column-major order.
pub fn gaussian_matrix_from<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    gaussian_matrix_from(&mut rng_from_seed(seed), rows, cols)
}

pub fn rng_gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    gaussian_matrix(rows, cols, seed)
}

/// Q-factor of a Gaussian matrix; Haar-distributed on `St(rows, cols)`.
pub fn orthonormal_from<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Result<DenseMatrix> {
    if rows < cols {
        return Err(Error::InvalidInput(format!(
            "orthonormal frame needs rows >= cols, got {rows}x{cols}"
        )));
    }
    qf(&gaussian_matrix_from(rng, rows, cols))
}

pub fn rng_orthonormal(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    orthonormal_from(&mut rng_from_seed(seed), rows, cols)
}

/// Haar-distributed element of `O(k)` (both components).
pub fn haar_orthogonal_from<R: Rng + ?Sized>(rng: &mut R, k: usize) -> DenseMatrix {
    // k x k frames always satisfy rows >= cols
    orthonormal_from(rng, k, k).expect("square frame")
}

/// Gaussian entries normalised to unit Frobenius norm: uniform on the unit sphere.
pub fn unit_tensor_from<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> DenseTensor {
    let len: usize = dims.iter().product();
    let mut data: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    let norm = data.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut data {
        *v /= norm;
    }
    DenseTensor::new(dims.to_vec(), data).expect("length matches dims")
}

pub fn rng_unit_tensor(dims: &[usize], seed: u64) -> DenseTensor {
    unit_tensor_from(&mut rng_from_seed(seed), dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_defect;

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(gaussian_matrix(3, 4, 42), gaussian_matrix(3, 4, 42));
        assert_ne!(gaussian_matrix(3, 4, 42), gaussian_matrix(3, 4, 43));
        assert_eq!(rng_unit_tensor(&[2, 3, 4], 1), rng_unit_tensor(&[2, 3, 4], 1));
        assert_eq!(rng_orthonormal(5, 3, 9).unwrap(), rng_orthonormal(5, 3, 9).unwrap());
    }

    #[test]
    fn orthonormal_frame() {
        for seed in 0..10 {
            let q = rng_orthonormal(5, 3, seed).unwrap();
            assert!(orthonormality_defect(&q) <= 1e-12);
        }
        assert!(rng_orthonormal(2, 3, 0).is_err());
    }

    #[test]
    fn unit_tensor_norm() {
        for seed in 0..10 {
            let t = rng_unit_tensor(&[5, 5, 5], seed);
            assert!((t.norm() - 1.0).abs() <= 1e-14);
        }
    }
}
