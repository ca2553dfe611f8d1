//! Explicit Jacobian of `G_T(U_1, …, U_D, S) = (U_1 ⊗ … ⊗ U_D) S` in orthonormal
//! tangent coordinates.
//!
//! Tangent basis of `St(n_i, k_i)` at `U_i`: `U_i Ω` for the skew matrices
//! `Ω = (e_p e_qᵀ − e_q e_pᵀ)/√2`, `p < q` in lexicographic order, followed by
//! `U_i^⊥ E_ab` for the canonical basis of `ℝ^{(n_i−k_i)×k_i}` (row-major), with
//! `U_i^⊥` taken from the full Householder QR of `U_i`. The core directions are
//! `α E_l` in the tensor's linear order, and output coordinates are divided by
//! `α` (`α = 1` absolute, `α = ‖S‖_F` relative).
//!
//! Column order: skew blocks of every mode, then the core, then the complement
//! blocks of every mode.

use nalgebra::DMatrix;

use super::{Metric, TuckerDecomposition};
use crate::error::{Error, Result};
use crate::fcre::kappa_inverse_problem;
use crate::linalg::{
    multilinear_multiply, orthogonal_complement, qf, DenseMatrix, DenseTensor, RankPolicy,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TangentDirection {
    Skew { mode: usize, p: usize, q: usize },
    Core { index: usize },
    Complement { mode: usize, row: usize, col: usize },
}

pub fn tangent_basis(d: &TuckerDecomposition) -> Vec<TangentDirection> {
    let ranks = d.ranks();
    let dims = d.dims();
    let mut out = Vec::new();
    for (mode, &k) in ranks.iter().enumerate() {
        for p in 0..k {
            for q in p + 1..k {
                out.push(TangentDirection::Skew { mode, p, q });
            }
        }
    }
    let core_len: usize = ranks.iter().product();
    out.extend((0..core_len).map(|index| TangentDirection::Core { index }));
    for (mode, (&n, &k)) in dims.iter().zip(&ranks).enumerate() {
        for row in 0..n - k {
            for col in 0..k {
                out.push(TangentDirection::Complement { mode, row, col });
            }
        }
    }
    out
}

/// `Π k_i + Σ k_i (n_i − k_i)`.
pub fn tucker_structural_rank(d: &TuckerDecomposition) -> usize {
    let ranks = d.ranks();
    let dims = d.dims();
    ranks.iter().product::<usize>()
        + dims.iter().zip(&ranks).map(|(&n, &k)| k * (n - k)).sum::<usize>()
}

fn metric_scale(d: &TuckerDecomposition, metric: Metric) -> f64 {
    match metric {
        Metric::Absolute => 1.0,
        Metric::Relative => d.core().norm(),
    }
}

struct Frames {
    complements: Vec<DenseMatrix>,
}

impl Frames {
    fn new(d: &TuckerDecomposition) -> Result<Self> {
        Ok(Frames {
            complements: d
                .factors()
                .iter()
                .map(orthogonal_complement)
                .collect::<Result<_>>()?,
        })
    }

    /// Ambient factor-tangent matrix for a skew or complement direction.
    fn factor_tangent(&self, d: &TuckerDecomposition, dir: TangentDirection) -> (usize, DenseMatrix) {
        match dir {
            TangentDirection::Skew { mode, p, q } => {
                let k = d.ranks()[mode];
                let mut omega = DMatrix::zeros(k, k);
                let h = std::f64::consts::FRAC_1_SQRT_2;
                omega[(p, q)] = h;
                omega[(q, p)] = -h;
                (mode, &d.factors()[mode] * omega)
            }
            TangentDirection::Complement { mode, row, col } => {
                let u = &d.factors()[mode];
                let mut t = DMatrix::zeros(u.nrows(), u.ncols());
                t.column_mut(col).copy_from(&self.complements[mode].column(row));
                (mode, t)
            }
            TangentDirection::Core { .. } => unreachable!("core directions have no factor tangent"),
        }
    }
}

fn core_unit(ranks: &[usize], index: usize) -> DenseTensor {
    let mut data = vec![0.0; ranks.iter().product()];
    data[index] = 1.0;
    DenseTensor::new(ranks.to_vec(), data).expect("length matches")
}

/// The full Jacobian `J = [J_0  J_1 … J_D]` of `G_T` in orthonormal coordinates.
pub fn tucker_jacobian(d: &TuckerDecomposition, metric: Metric) -> Result<DenseMatrix> {
    let alpha = metric_scale(d, metric);
    let frames = Frames::new(d)?;
    let ranks = d.ranks();
    let basis = tangent_basis(d);
    let rows: usize = d.dims().iter().product();
    let mut j = DMatrix::zeros(rows, basis.len());
    for (c, &dir) in basis.iter().enumerate() {
        let image = match dir {
            TangentDirection::Core { index } => {
                multilinear_multiply(d.factors(), &core_unit(&ranks, index))?
            }
            _ => {
                let (mode, tangent) = frames.factor_tangent(d, dir);
                let mut factors = d.factors().to_vec();
                factors[mode] = tangent;
                multilinear_multiply(&factors, d.core())?.scale(1.0 / alpha)
            }
        };
        j.column_mut(c).copy_from_slice(image.data());
    }
    Ok(j)
}

/// Reciprocal of the `r`-th singular value of [`tucker_jacobian`], `r` the structural rank.
pub fn cond_tucker_oracle(d: &TuckerDecomposition, metric: Metric) -> Result<f64> {
    if d.dims().iter().zip(d.ranks()).all(|(&n, k)| n == k) {
        return Err(Error::OutOfHypothesis);
    }
    let j = tucker_jacobian(d, metric)?;
    Ok(kappa_inverse_problem(&j, RankPolicy::structural(tucker_structural_rank(d)))?.kappa)
}

/// `t ↦ vec(G_T(qf(U_i + Σ t_c B_c), S + α Σ t_l E_l)) / α` in the coordinates of
/// [`tangent_basis`]. Its derivative at `t = 0` is [`tucker_jacobian`].
pub fn tucker_coordinate_map(
    d: &TuckerDecomposition,
    metric: Metric,
) -> Result<impl Fn(&[f64]) -> Vec<f64> + '_> {
    let alpha = metric_scale(d, metric);
    let frames = Frames::new(d)?;
    let basis = tangent_basis(d);
    let tangents: Vec<Option<(usize, DenseMatrix)>> = basis
        .iter()
        .map(|&dir| match dir {
            TangentDirection::Core { .. } => None,
            _ => Some(frames.factor_tangent(d, dir)),
        })
        .collect();
    Ok(move |t: &[f64]| {
        let mut factors = d.factors().to_vec();
        let mut core = d.core().clone().into_data();
        for ((&dir, tangent), &tc) in basis.iter().zip(&tangents).zip(t) {
            match (dir, tangent) {
                (TangentDirection::Core { index }, _) => core[index] += alpha * tc,
                (_, Some((mode, b))) => factors[*mode] += b * tc,
                _ => unreachable!(),
            }
        }
        let factors: Vec<DenseMatrix> = factors
            .iter()
            .map(|f| qf(f).expect("perturbed frame keeps rows >= cols"))
            .collect();
        let core = DenseTensor::new(d.ranks(), core).expect("core dims unchanged");
        multilinear_multiply(&factors, &core)
            .expect("shapes unchanged")
            .scale(1.0 / alpha)
            .into_data()
    })
}
