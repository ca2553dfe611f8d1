//! Condition numbers of feasible constant-rank equations `F(x, y) = c`.
//!
//! The engine only sees Jacobian blocks already expressed in orthonormal
//! coordinates of the tangent spaces; building those coordinates is the
//! caller's job (see [`crate::tucker`] for an example).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pseudoinverse_from_svd, spectral_norm, svd, DenseMatrix, RankPolicy};

/// `∂F/∂x` and `∂F/∂y` at a solution pair, plus the constant rank of `∂F/∂y`.
#[derive(Clone, Debug)]
pub struct JacobianBlocks {
    dfdx: DenseMatrix,
    dfdy: DenseMatrix,
    rank_policy: RankPolicy,
}

impl JacobianBlocks {
    pub fn new(dfdx: DenseMatrix, dfdy: DenseMatrix, rank_policy: RankPolicy) -> Result<Self> {
        if dfdx.nrows() != dfdy.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "dF/dx has {} rows, dF/dy has {}",
                dfdx.nrows(),
                dfdy.nrows()
            )));
        }
        rank_policy.validate()?;
        Ok(JacobianBlocks {
            dfdx,
            dfdy,
            rank_policy,
        })
    }

    pub fn dfdx(&self) -> &DenseMatrix {
        &self.dfdx
    }

    pub fn dfdy(&self) -> &DenseMatrix {
        &self.dfdy
    }

    pub fn rank_policy(&self) -> RankPolicy {
        self.rank_policy
    }

    /// The rows in `rows` of both blocks, with a new policy for the restricted `dF/dy`.
    pub fn restrict_rows(&self, rows: &[usize], policy: RankPolicy) -> Result<Self> {
        let n = self.dfdy.nrows();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::OutOfRange(format!("row {bad} of a {n}-row system")));
        }
        JacobianBlocks::new(self.dfdx.select_rows(rows), self.dfdy.select_rows(rows), policy)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kappa: f64,
    pub r_used: usize,
    /// Smallest accepted singular value of `dF/dy`.
    pub sigma_r: f64,
    pub policy_echo: RankPolicy,
}

/// `κ_LS = ‖(∂F/∂y)† ∂F/∂x‖₂` with the pseudoinverse truncated per the rank policy.
pub fn kappa_ls(blocks: &JacobianBlocks) -> Result<ConditionReport> {
    let dec = svd(&blocks.dfdy)?;
    let r = blocks.rank_policy.accepted_rank(&dec.singular_values)?;
    if r == 0 {
        return Err(Error::DegenerateSystem);
    }
    let pinv = pseudoinverse_from_svd(&dec, r);
    let kappa = spectral_norm(&(pinv * &blocks.dfdx))?;
    Ok(ConditionReport {
        kappa,
        r_used: r,
        sigma_r: dec.singular_values[r - 1],
        policy_echo: blocks.rank_policy,
    })
}

/// Constant-rank inverse problem `G(y) = x`: `κ = ‖DG†‖ = 1/σ_r(DG)`.
///
/// This is [`kappa_ls`] with `∂F/∂x = −I`, evaluated without forming the product.
pub fn kappa_inverse_problem(dg: &DenseMatrix, policy: RankPolicy) -> Result<ConditionReport> {
    let sv = crate::linalg::singular_values(dg)?;
    let r = policy.accepted_rank(&sv)?;
    if r == 0 {
        return Err(Error::DegenerateSystem);
    }
    Ok(ConditionReport {
        kappa: 1.0 / sv[r - 1],
        r_used: r,
        sigma_r: sv[r - 1],
        policy_echo: policy,
    })
}

/// Central differences: column `i` is `(f(p + h e_i) − f(p − h e_i)) / 2h`.
pub fn finite_difference_jacobian<F>(map: F, point: &[f64], step: f64) -> Result<DenseMatrix>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    let mut probe = point.to_vec();
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(point.len());
    let mut out_len = None;
    for i in 0..point.len() {
        probe[i] = point[i] + step;
        let plus = map(&probe);
        probe[i] = point[i] - step;
        let minus = map(&probe);
        probe[i] = point[i];

        if plus.len() != minus.len() || out_len.is_some_and(|n| n != plus.len()) {
            return Err(Error::DimensionMismatch("map output length changed".into()));
        }
        out_len = Some(plus.len());
        if plus.iter().chain(&minus).any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-finite map output while differentiating coordinate {i}"
            )));
        }
        columns.push(DVector::from_iterator(
            plus.len(),
            plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * step)),
        ));
    }
    if columns.is_empty() {
        let rows = map(point).len();
        return Ok(DMatrix::zeros(rows, 0));
    }
    Ok(DMatrix::from_columns(&columns))
}

/// A row subset of a system together with the rank policy of its restricted `∂F/∂y`.
#[derive(Clone, Debug)]
pub struct RowSubset {
    pub rows: Vec<usize>,
    pub policy: RankPolicy,
}

impl RowSubset {
    pub fn new(rows: Vec<usize>, policy: RankPolicy) -> Self {
        RowSubset { rows, policy }
    }
}

/// `κ_LS` of each row-restricted subproblem, in input order.
pub fn subproblem_kappas(
    blocks: &JacobianBlocks,
    subsets: &[RowSubset],
) -> Result<Vec<ConditionReport>> {
    subsets
        .iter()
        .map(|s| kappa_ls(&blocks.restrict_rows(&s.rows, s.policy)?))
        .collect()
}
