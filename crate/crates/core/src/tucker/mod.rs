//! Orthogonal Tucker decompositions `X = (U_1 ⊗ … ⊗ U_D) S`.

mod hosvd;
mod oracle;

pub use hosvd::st_hosvd;
pub use oracle::{
    cond_tucker_oracle, tangent_basis, tucker_coordinate_map, tucker_jacobian, tucker_structural_rank,
    TangentDirection,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    multilinear_multiply, orthonormal_from, orthonormality_defect, rng_from_seed, singular_values,
    unit_tensor_from, DenseMatrix, DenseTensor, RankPolicy,
};

/// Tolerance on `‖UᵢᵀUᵢ − I‖_max` accepted at construction.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Euclidean product metric on factors, core and tensor space.
    Absolute,
    /// Core and tensor spaces scaled by `1/‖S‖²`.
    Relative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuckerDecomposition {
    factors: Vec<DenseMatrix>,
    core: DenseTensor,
}

impl TuckerDecomposition {
    /// Checks shapes, orthonormal columns and full multilinear rank of the core.
    pub fn new(factors: Vec<DenseMatrix>, core: DenseTensor) -> Result<Self> {
        if factors.len() != core.ndim() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for a core of order {}",
                factors.len(),
                core.ndim()
            )));
        }
        for (i, (u, &k)) in factors.iter().zip(core.dims()).enumerate() {
            if u.ncols() != k {
                return Err(Error::DimensionMismatch(format!(
                    "factor {i} has {} columns, core mode size is {k}",
                    u.ncols()
                )));
            }
            if k == 0 || u.nrows() < k {
                return Err(Error::InvalidInput(format!(
                    "factor {i} is {}x{k}, need n_i >= k_i >= 1",
                    u.nrows()
                )));
            }
            let defect = orthonormality_defect(u);
            if defect > ORTHONORMALITY_TOL {
                return Err(Error::InvalidInput(format!(
                    "factor {i} is not orthonormal (defect {defect:e})"
                )));
            }
        }
        if !has_full_multilinear_rank(&core)? {
            return Err(Error::InvalidInput(
                "core does not have full multilinear rank".into(),
            ));
        }
        Ok(TuckerDecomposition { factors, core })
    }

    pub fn factors(&self) -> &[DenseMatrix] {
        &self.factors
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// `(k_1, …, k_D)`.
    pub fn ranks(&self) -> Vec<usize> {
        self.core.dims().to_vec()
    }

    /// `(n_1, …, n_D)`.
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|u| u.nrows()).collect()
    }

    pub fn into_parts(self) -> (Vec<DenseMatrix>, DenseTensor) {
        (self.factors, self.core)
    }
}

pub(crate) fn has_full_multilinear_rank(core: &DenseTensor) -> Result<bool> {
    for mode in 0..core.ndim() {
        let m = core.unfold(mode)?;
        let policy = RankPolicy::default_for(m.nrows(), m.ncols());
        if policy.accepted_rank(&singular_values(&m)?)? != core.dims()[mode] {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn tucker_reconstruct(d: &TuckerDecomposition) -> Result<DenseTensor> {
    multilinear_multiply(&d.factors, &d.core)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSigma {
    pub mode: usize,
    /// `σ_{k_i}(S_(i))`
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuckerCondReport {
    pub kappa_abs: f64,
    pub kappa_rel: f64,
    /// `min_{i: k_i < n_i} σ_{k_i}(S_(i))`
    pub sigma: f64,
    /// Only modes with `k_i < n_i`.
    pub per_mode_sigma: Vec<ModeSigma>,
    /// `‖X‖_F = ‖S‖_F`
    pub x_norm: f64,
}

impl TuckerCondReport {
    pub fn kappa(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Absolute => self.kappa_abs,
            Metric::Relative => self.kappa_rel,
        }
    }
}

/// Closed-form condition numbers of the orthogonal Tucker decomposition:
/// `max{1/σ, 1}` (absolute metric) and `‖X‖_F/σ` (relative metric).
pub fn cond_tucker(d: &TuckerDecomposition) -> Result<TuckerCondReport> {
    let mut per_mode_sigma = Vec::new();
    for (mode, (u, &k)) in d.factors.iter().zip(d.core.dims()).enumerate() {
        if k < u.nrows() {
            let sv = singular_values(&d.core.unfold(mode)?)?;
            per_mode_sigma.push(ModeSigma {
                mode,
                sigma: sv[k - 1],
            });
        }
    }
    if per_mode_sigma.is_empty() {
        return Err(Error::OutOfHypothesis);
    }
    let sigma = per_mode_sigma
        .iter()
        .map(|m| m.sigma)
        .fold(f64::INFINITY, f64::min);
    let x_norm = d.core.norm();
    Ok(TuckerCondReport {
        kappa_abs: (1.0 / sigma).max(1.0),
        kappa_rel: x_norm / sigma,
        sigma,
        per_mode_sigma,
        x_norm,
    })
}

/// `(U_1Q_1ᵀ, …, U_DQ_Dᵀ, (Q_1 ⊗ … ⊗ Q_D) S)`: another point on the same fiber.
pub fn tucker_fiber_rotate(
    d: &TuckerDecomposition,
    rotations: &[DenseMatrix],
) -> Result<TuckerDecomposition> {
    if rotations.len() != d.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} rotations for order {}",
            rotations.len(),
            d.order()
        )));
    }
    for (i, (q, &k)) in rotations.iter().zip(d.core.dims()).enumerate() {
        if q.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!(
                "rotation {i} must be {k}x{k}"
            )));
        }
        if orthonormality_defect(q) > ORTHONORMALITY_TOL {
            return Err(Error::InvalidInput(format!("rotation {i} is not orthogonal")));
        }
    }
    let factors = d
        .factors
        .iter()
        .zip(rotations)
        .map(|(u, q)| u * q.transpose())
        .collect();
    let core = multilinear_multiply(rotations, &d.core)?;
    TuckerDecomposition::new(factors, core)
}

/// Haar factors and a uniformly random unit-norm core, scaled by `core_scale`.
pub fn random_decomposition(
    dims: &[usize],
    ranks: &[usize],
    core_scale: f64,
    seed: u64,
) -> Result<TuckerDecomposition> {
    if dims.len() != ranks.len() {
        return Err(Error::DimensionMismatch("dims and ranks differ in length".into()));
    }
    let mut rng = rng_from_seed(seed);
    let factors = dims
        .iter()
        .zip(ranks)
        .map(|(&n, &k)| orthonormal_from(&mut rng, n, k))
        .collect::<Result<Vec<_>>>()?;
    let core = unit_tensor_from(&mut rng, ranks).scale(core_scale);
    TuckerDecomposition::new(factors, core)
}

/// Identity factors `I_{k_i}`; reconstruction equals the core.
pub fn identity_factors(ranks: &[usize]) -> Vec<DenseMatrix> {
    ranks.iter().map(|&k| DMatrix::identity(k, k)).collect()
}
