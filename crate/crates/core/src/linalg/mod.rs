//! Dense matrix and tensor kernels shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<f64>`; tensors are [`DenseTensor`]. The SVD
//! is delegated to faer and Householder QR to nalgebra; everything rank-related
//! (policies, pseudoinverse truncation, orthonormal complements, sign-fixed QR)
//! lives here.

mod dump;
mod rng;
mod tensor;

pub use dump::{matrix_to_csv, tensor_to_csv, write_matrix_csv, write_tensor_csv};
pub use rng::{
    gaussian_matrix, gaussian_matrix_from, haar_orthogonal_from, orthonormal_from,
    rng_from_seed, rng_gaussian_matrix, rng_orthonormal, rng_unit_tensor, unit_tensor_from,
    SeededRng,
};
pub use tensor::{fold, multilinear_multiply, multilinear_rank, DenseTensor};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix, column-major storage.
pub type DenseMatrix = DMatrix<f64>;

/// Decides which singular values count as nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RankPolicy {
    /// The rank is known analytically: exactly the `rank` leading singular values are kept.
    Structural { rank: usize },
    /// Keep `σ_i > rel_tol · σ_1`.
    Threshold { rel_tol: f64 },
}

impl RankPolicy {
    pub fn structural(rank: usize) -> Self {
        RankPolicy::Structural { rank }
    }

    pub fn threshold(rel_tol: f64) -> Self {
        RankPolicy::Threshold { rel_tol }
    }

    /// `max(rows, cols) · ε` relative to `σ_1`.
    pub fn default_for(rows: usize, cols: usize) -> Self {
        RankPolicy::Threshold {
            rel_tol: default_rel_tol(rows, cols),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RankPolicy::Structural { .. } => Ok(()),
            RankPolicy::Threshold { rel_tol } if rel_tol > 0.0 && rel_tol.is_finite() => Ok(()),
            RankPolicy::Threshold { rel_tol } => Err(Error::InvalidPolicy(format!(
                "threshold must be positive and finite, got {rel_tol}"
            ))),
        }
    }

    /// Number of accepted singular values in a descending list.
    pub fn accepted_rank(&self, singular_values: &[f64]) -> Result<usize> {
        self.validate()?;
        match *self {
            RankPolicy::Structural { rank } => {
                if rank > singular_values.len() {
                    Err(Error::InvalidRank(format!(
                        "structural rank {rank} exceeds min(rows, cols) = {}",
                        singular_values.len()
                    )))
                } else {
                    Ok(rank)
                }
            }
            RankPolicy::Threshold { rel_tol } => {
                let Some(&top) = singular_values.first() else {
                    return Ok(0);
                };
                if top <= 0.0 {
                    return Ok(0);
                }
                let cutoff = rel_tol * top;
                Ok(singular_values.iter().take_while(|&&s| s > cutoff).count())
            }
        }
    }
}

pub fn default_rel_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON
}

/// Thin SVD `A = U diag(σ) Vᵀ`, singular values sorted descending.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub left: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub right: DenseMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        let p = self.singular_values.len();
        let mut scaled = self.left.clone();
        for j in 0..p {
            scaled.column_mut(j).scale_mut(self.singular_values[j]);
        }
        scaled * self.right.transpose()
    }
}

pub fn check_finite(a: &DenseMatrix, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    check_finite(a, "svd input")?;
    let (m, n) = a.shape();
    let p = m.min(n);
    if p == 0 {
        return Ok(SvdResult {
            left: DMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            right: DMatrix::zeros(n, 0),
        });
    }
    let dec = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::NumericalFailure(format!("SVD of {m}x{n} matrix failed: {e:?}")))?;
    let (u, v, sigma) = (dec.U(), dec.V(), dec.S().column_vector());
    Ok(SvdResult {
        left: DMatrix::from_fn(m, p, |i, j| u[(i, j)]),
        singular_values: (0..p).map(|j| sigma[j]).collect(),
        right: DMatrix::from_fn(n, p, |i, j| v[(i, j)]),
    })
}

fn to_faer(a: &DenseMatrix) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    check_finite(a, "svd input")?;
    if a.nrows().min(a.ncols()) == 0 {
        return Ok(Vec::new());
    }
    to_faer(a)
        .singular_values()
        .map_err(|e| Error::NumericalFailure(format!("singular values failed: {e:?}")))
}

/// Moore–Penrose pseudoinverse `V Σ_r⁻¹ Uᵀ` keeping the singular values accepted by `policy`.
pub fn pseudoinverse(a: &DenseMatrix, policy: RankPolicy) -> Result<DenseMatrix> {
    let dec = svd(a)?;
    let r = policy.accepted_rank(&dec.singular_values)?;
    Ok(pseudoinverse_from_svd(&dec, r))
}

pub(crate) fn pseudoinverse_from_svd(dec: &SvdResult, r: usize) -> DenseMatrix {
    let mut v = dec.right.columns(0, r).into_owned();
    for j in 0..r {
        v.column_mut(j).scale_mut(1.0 / dec.singular_values[j]);
    }
    v * dec.left.columns(0, r).transpose()
}

/// `σ_r` for the rank `r` chosen by `policy`.
pub fn smallest_nonzero_sv(a: &DenseMatrix, policy: RankPolicy) -> Result<f64> {
    let sv = singular_values(a)?;
    let r = policy.accepted_rank(&sv)?;
    if r == 0 {
        return Err(Error::RankZero);
    }
    Ok(sv[r - 1])
}

pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.kronecker(b)
}

/// Q-factor of a thin QR decomposition with the signs fixed so that `diag(R) > 0`.
///
/// Requires `rows ≥ cols`. This is the QR retraction used on Stiefel manifolds
/// and orthogonal groups, and it maps Gaussian matrices to Haar-distributed frames.
pub fn qf(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "QR Q-factor needs rows >= cols, got {m}x{n}"
        )));
    }
    check_finite(a, "qr input")?;
    let qr = nalgebra::QR::new(a.clone());
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// Columns `k+1..n` of the full Householder Q of `u ∈ ℝ^{n×k}`, so that `[u  u⊥]` is orthogonal
/// when `u` has orthonormal columns. Returns an `n × 0` matrix when `k = n`.
pub fn orthogonal_complement(u: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, k) = u.shape();
    if n < k {
        return Err(Error::DimensionMismatch(format!(
            "complement needs rows >= cols, got {n}x{k}"
        )));
    }
    if k == 0 {
        return Ok(DMatrix::identity(n, n));
    }
    let qr = nalgebra::QR::new(u.clone());
    let mut qt = DMatrix::identity(n, n);
    qr.q_tr_mul(&mut qt);
    let q = qt.transpose();
    Ok(q.columns(k, n - k).into_owned())
}

/// Orthogonal polar factor `U Vᵀ` of a square matrix; the maximiser of `⟨Q, m⟩` over `O(k)`.
pub fn polar_factor(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("polar factor needs a square matrix".into()));
    }
    let dec = svd(m)?;
    Ok(&dec.left * dec.right.transpose())
}

/// `‖QᵀQ − I‖_max`.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.transpose() * q;
    let k = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}
