//! Rank-revealing two-factor decomposition `X = LR` with `L ∈ ℝ^{m×k}`, `R ∈ ℝ^{k×n}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcre::kappa_inverse_problem;
use crate::linalg::{default_rel_tol, kron, singular_values, svd, DenseMatrix, RankPolicy};

#[derive(Clone, Debug, PartialEq)]
pub struct TwoFactorPair {
    l: DenseMatrix,
    r: DenseMatrix,
}

impl TwoFactorPair {
    /// Validates shapes and that both factors have rank `k` under the default threshold.
    pub fn new(l: DenseMatrix, r: DenseMatrix) -> Result<Self> {
        Self::with_tolerance(l, r, None)
    }

    /// Like [`TwoFactorPair::new`] with an explicit relative rank tolerance.
    pub fn with_tolerance(l: DenseMatrix, r: DenseMatrix, rel_tol: Option<f64>) -> Result<Self> {
        let (m, k) = l.shape();
        let (k2, n) = r.shape();
        if k != k2 {
            return Err(Error::DimensionMismatch(format!(
                "L is {m}x{k} but R is {k2}x{n}"
            )));
        }
        if k == 0 || m < k || n < k {
            return Err(Error::InvalidInput(format!(
                "need m, n >= k >= 1, got m={m}, n={n}, k={k}"
            )));
        }
        for (name, f) in [("L", &l), ("R", &r)] {
            let policy = RankPolicy::threshold(
                rel_tol.unwrap_or_else(|| default_rel_tol(f.nrows(), f.ncols())),
            );
            let rank = policy.accepted_rank(&singular_values(f)?)?;
            if rank != k {
                return Err(Error::InvalidInput(format!(
                    "{name} has numerical rank {rank}, expected {k}"
                )));
            }
        }
        Ok(TwoFactorPair { l, r })
    }

    pub fn l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// `(m, n, k)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.l.nrows(), self.r.ncols(), self.l.ncols())
    }

    pub fn product(&self) -> DenseMatrix {
        &self.l * &self.r
    }

    /// `(LQ, QᵀR)`, another point on the same fiber for orthogonal `Q`.
    pub fn rotate(&self, q: &DenseMatrix) -> Result<Self> {
        Self::new(&self.l * q, q.transpose() * &self.r)
    }

    /// `(LM, M⁻¹R)` for invertible `M`.
    pub fn reparametrize(&self, m: &DenseMatrix) -> Result<Self> {
        let inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("reparametrization matrix is singular".into()))?;
        Self::with_tolerance(&self.l * m, inv * &self.r, Some(1e-13))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoFactorCondReport {
    pub kappa: f64,
    /// `σ_k(L)`
    pub sigma_k_l: f64,
    /// `σ_k(R)`
    pub sigma_k_r: f64,
    /// `σ_m(L)`, zero when `m > k`
    pub sigma_m_l: f64,
    /// `σ_n(R)`, zero when `n > k`
    pub sigma_n_r: f64,
}

impl TwoFactorCondReport {
    fn from_sigmas(sigma_k_l: f64, sigma_k_r: f64, sigma_m_l: f64, sigma_n_r: f64) -> Self {
        let a = sigma_k_l * sigma_k_l + sigma_n_r * sigma_n_r;
        let b = sigma_m_l * sigma_m_l + sigma_k_r * sigma_k_r;
        TwoFactorCondReport {
            kappa: 1.0 / a.min(b).sqrt(),
            sigma_k_l,
            sigma_k_r,
            sigma_m_l,
            sigma_n_r,
        }
    }

    /// Recomputes `κ` from the stored singular values.
    pub fn recompute_kappa(&self) -> f64 {
        Self::from_sigmas(self.sigma_k_l, self.sigma_k_r, self.sigma_m_l, self.sigma_n_r).kappa
    }
}

/// Closed form `1/√min{σ_k(L)² + σ_n(R)², σ_m(L)² + σ_k(R)²}`, with `σ_i = 0` for `i > k`.
pub fn cond_two_factor(p: &TwoFactorPair) -> Result<TwoFactorCondReport> {
    let (m, n, k) = p.shape();
    let sl = singular_values(&p.l)?;
    let sr = singular_values(&p.r)?;
    let sigma_k_l = sl[k - 1];
    let sigma_k_r = sr[k - 1];
    let sigma_m_l = if m > k { 0.0 } else { sl[m - 1] };
    let sigma_n_r = if n > k { 0.0 } else { sr[n - 1] };
    Ok(TwoFactorCondReport::from_sigmas(sigma_k_l, sigma_k_r, sigma_m_l, sigma_n_r))
}

/// `J = [I_m ⊗ Rᵀ   L ⊗ I_n]`, the differential of `(L, R) ↦ LR` with row-major vectorisation.
pub fn two_factor_jacobian(p: &TwoFactorPair) -> DenseMatrix {
    let (m, n, _) = p.shape();
    let left = kron(&DMatrix::identity(m, m), &p.r.transpose());
    let right = kron(&p.l, &DMatrix::identity(n, n));
    let mut j = DMatrix::zeros(m * n, left.ncols() + right.ncols());
    j.columns_mut(0, left.ncols()).copy_from(&left);
    j.columns_mut(left.ncols(), right.ncols()).copy_from(&right);
    j
}

/// `mn − (m−k)(n−k)`: the number of nonzero `√(σ_i(L)² + σ_j(R)²)`.
pub fn structural_rank(m: usize, n: usize, k: usize) -> usize {
    m * n - (m - k) * (n - k)
}

/// `1/σ_r(J)` of the explicit Jacobian with its structural rank.
pub fn cond_two_factor_oracle(p: &TwoFactorPair) -> Result<f64> {
    let (m, n, k) = p.shape();
    let j = two_factor_jacobian(p);
    Ok(kappa_inverse_problem(&j, RankPolicy::structural(structural_rank(m, n, k)))?.kappa)
}

/// `(UΣ^{1/2}, Σ^{1/2}Vᵀ)` from the compact SVD truncated to `k`.
///
/// When `k < min(m, n)` this pair minimises the condition number over all
/// factorisations, with value `σ_k(X)^{-1/2}`.
pub fn balanced_factorization(x: &DenseMatrix, k: usize) -> Result<TwoFactorPair> {
    let dec = svd(x)?;
    let rank = RankPolicy::default_for(x.nrows(), x.ncols()).accepted_rank(&dec.singular_values)?;
    if k == 0 || rank < k {
        return Err(Error::InvalidRank(format!(
            "matrix has numerical rank {rank}, cannot factor with k = {k}"
        )));
    }
    let mut l = dec.left.columns(0, k).into_owned();
    let mut r = dec.right.columns(0, k).transpose();
    for j in 0..k {
        let s = dec.singular_values[j].sqrt();
        l.column_mut(j).scale_mut(s);
        r.row_mut(j).scale_mut(s);
    }
    TwoFactorPair::new(l, r)
}
