//! Fiber-aligned least-squares distance between two orthogonal Tucker decompositions:
//!
//! `E² = min_{Q_i ∈ O(k_i)} ‖S₀ − (Q_1ᵀ ⊗ … ⊗ Q_Dᵀ) S‖²_F + Σ_i ‖U_i⁰ − U_i Q_i‖²_F`
//!
//! solved by Riemannian gradient descent with a QR retraction and Armijo backtracking.

mod bruteforce;

pub use bruteforce::{ls_distance_bruteforce_2d, ls_distance_bruteforce_2d_with_grid};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    haar_orthogonal_from, multilinear_multiply, polar_factor, qf, rng_from_seed, DenseMatrix,
    DenseTensor,
};
use crate::tucker::TuckerDecomposition;

#[derive(Clone, Debug)]
pub struct AlignmentProblem {
    reference: TuckerDecomposition,
    candidate: TuckerDecomposition,
}

impl AlignmentProblem {
    pub fn new(reference: TuckerDecomposition, candidate: TuckerDecomposition) -> Result<Self> {
        if reference.dims() != candidate.dims() || reference.ranks() != candidate.ranks() {
            return Err(Error::DimensionMismatch(format!(
                "reference dims {:?} ranks {:?} vs candidate dims {:?} ranks {:?}",
                reference.dims(),
                reference.ranks(),
                candidate.dims(),
                candidate.ranks()
            )));
        }
        Ok(AlignmentProblem {
            reference,
            candidate,
        })
    }

    pub fn reference(&self) -> &TuckerDecomposition {
        &self.reference
    }

    pub fn candidate(&self) -> &TuckerDecomposition {
        &self.candidate
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.reference.ranks()
    }

    pub fn swapped(&self) -> Self {
        AlignmentProblem {
            reference: self.candidate.clone(),
            candidate: self.reference.clone(),
        }
    }

    fn check_rotations(&self, rotations: &[DenseMatrix]) -> Result<()> {
        let ranks = self.ranks();
        if rotations.len() != ranks.len()
            || rotations.iter().zip(&ranks).any(|(q, &k)| q.shape() != (k, k))
        {
            return Err(Error::DimensionMismatch(format!(
                "rotations must be square with sizes {ranks:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Armijo {
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

impl Default for Armijo {
    fn default() -> Self {
        Armijo {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GdConfig {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub armijo: Armijo,
    /// Total number of starts from the identity/random pool, counting the Procrustes start.
    pub n_restarts: usize,
    /// Also start from the Procrustes point moved into each other connected
    /// component of `O(k_1) × … × O(k_D)`. QR retractions never leave a component.
    pub component_sweep: bool,
    /// Seed for the random restarts.
    pub seed: u64,
    /// Keep the objective value after every accepted step of the winning run.
    pub record_trace: bool,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            grad_tol: 5e-8,
            max_iters: 10_000,
            armijo: Armijo::default(),
            n_restarts: 3,
            component_sweep: true,
            seed: 0,
            record_trace: false,
        }
    }
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.armijo;
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidInput("grad_tol must be positive".into()));
        }
        if !(a.shrink > 0.0 && a.shrink < 1.0) {
            return Err(Error::InvalidInput("Armijo shrink must lie in (0, 1)".into()));
        }
        if !(a.initial_step > 0.0 && a.sufficient_decrease > 0.0 && a.sufficient_decrease < 1.0) {
            return Err(Error::InvalidInput("invalid Armijo parameters".into()));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidInput("n_restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub e_hat: f64,
    pub rotations: Vec<DenseMatrix>,
    pub iterations: usize,
    pub converged: bool,
    pub final_grad_norm: f64,
    pub restarts_used: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub objective_trace: Vec<f64>,
}

/// `‖S₀ − (Q_1ᵀ ⊗ … ⊗ Q_Dᵀ) S‖² + Σ_i ‖U_i⁰ − U_i Q_i‖²`, evaluated directly.
pub fn alignment_objective(p: &AlignmentProblem, rotations: &[DenseMatrix]) -> Result<f64> {
    p.check_rotations(rotations)?;
    Ok(Workspace::new(p).objective(rotations))
}

/// Riemannian gradient `Q_i · skew(Q_iᵀ ∂f/∂Q_i)` for each factor.
pub fn alignment_gradient(p: &AlignmentProblem, rotations: &[DenseMatrix]) -> Result<Vec<DenseMatrix>> {
    p.check_rotations(rotations)?;
    Ok(Workspace::new(p).gradient(rotations))
}

/// Precomputed pieces of one alignment problem.
struct Workspace<'a> {
    p: &'a AlignmentProblem,
    /// `U_iᵀ U_i⁰`
    cross: Vec<DenseMatrix>,
    /// `U_iᵀ U_i`
    gram: Vec<DenseMatrix>,
}

impl<'a> Workspace<'a> {
    fn new(p: &'a AlignmentProblem) -> Self {
        let u0 = p.reference.factors();
        let u = p.candidate.factors();
        Workspace {
            p,
            cross: u.iter().zip(u0).map(|(ui, u0i)| ui.transpose() * u0i).collect(),
            gram: u.iter().map(|ui| ui.transpose() * ui).collect(),
        }
    }

    fn rotated_core(&self, rotations: &[DenseMatrix], skip: Option<usize>) -> DenseTensor {
        let transposed: Vec<DenseMatrix> = rotations
            .iter()
            .enumerate()
            .map(|(i, q)| {
                if Some(i) == skip {
                    DMatrix::identity(q.nrows(), q.nrows())
                } else {
                    q.transpose()
                }
            })
            .collect();
        multilinear_multiply(&transposed, self.p.candidate.core()).expect("shapes checked")
    }

    fn objective(&self, rotations: &[DenseMatrix]) -> f64 {
        let t = self.rotated_core(rotations, None);
        let core_term: f64 = self
            .p
            .reference
            .core()
            .data()
            .iter()
            .zip(t.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let factor_term: f64 = self
            .p
            .reference
            .factors()
            .iter()
            .zip(self.p.candidate.factors())
            .zip(rotations)
            .map(|((u0, u), q)| (u0 - u * q).norm_squared())
            .sum();
        core_term + factor_term
    }

    fn euclidean_gradient(&self, rotations: &[DenseMatrix]) -> Vec<DenseMatrix> {
        let s0 = self.p.reference.core();
        let t = self.rotated_core(rotations, None);
        let residual = t.sub(s0).expect("same dims");
        (0..rotations.len())
            .map(|i| {
                let partial = self.rotated_core(rotations, Some(i));
                let core_part = partial.unfold(i).expect("mode in range")
                    * residual.unfold(i).expect("mode in range").transpose()
                    * 2.0;
                let factor_part = (&self.cross[i] - &self.gram[i] * &rotations[i]) * -2.0;
                core_part + factor_part
            })
            .collect()
    }

    fn gradient(&self, rotations: &[DenseMatrix]) -> Vec<DenseMatrix> {
        self.euclidean_gradient(rotations)
            .into_iter()
            .zip(rotations)
            .map(|(g, q)| {
                let a = q.transpose() * g;
                q * ((&a - a.transpose()) * 0.5)
            })
            .collect()
    }
}

fn norm_of(tangent: &[DenseMatrix]) -> f64 {
    tangent.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt()
}

/// QR retraction of `Q − t·ξ`, `diag(R) > 0`.
pub fn retract(rotations: &[DenseMatrix], direction: &[DenseMatrix], step: f64) -> Vec<DenseMatrix> {
    rotations
        .iter()
        .zip(direction)
        .map(|(q, xi)| qf(&(q - xi * step)).expect("square"))
        .collect()
}

struct Run {
    rotations: Vec<DenseMatrix>,
    value: f64,
    iterations: usize,
    grad_norm: f64,
    trace: Vec<f64>,
}

fn descend(ws: &Workspace<'_>, start: Vec<DenseMatrix>, cfg: &GdConfig) -> Run {
    let mut q = start;
    let mut f = ws.objective(&q);
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(f);
    }
    let mut grad = ws.gradient(&q);
    let mut gn = norm_of(&grad);
    let mut iterations = 0;
    while gn > cfg.grad_tol && iterations < cfg.max_iters {
        let mut step = cfg.armijo.initial_step;
        let accepted = loop {
            let trial = retract(&q, &grad, step);
            let ft = ws.objective(&trial);
            if ft <= f - cfg.armijo.sufficient_decrease * step * gn * gn {
                break Some((trial, ft));
            }
            step *= cfg.armijo.shrink;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((trial, ft)) = accepted else {
            // no representable decrease left
            break;
        };
        q = trial;
        f = ft;
        if cfg.record_trace {
            trace.push(f);
        }
        grad = ws.gradient(&q);
        gn = norm_of(&grad);
        iterations += 1;
    }
    Run {
        rotations: q,
        value: f,
        iterations,
        grad_norm: gn,
        trace,
    }
}

/// Procrustes start: `Q_i = polar(U_iᵀ U_i⁰)`, the minimiser of the factor terms.
pub fn procrustes_start(p: &AlignmentProblem) -> Result<Vec<DenseMatrix>> {
    p.candidate
        .factors()
        .iter()
        .zip(p.reference.factors())
        .map(|(u, u0)| polar_factor(&(u.transpose() * u0)))
        .collect()
}

fn starting_points(p: &AlignmentProblem, cfg: &GdConfig) -> Result<Vec<Vec<DenseMatrix>>> {
    let ranks = p.ranks();
    let procrustes = procrustes_start(p)?;
    let mut starts = vec![procrustes.clone()];
    let order = ranks.len();
    if cfg.component_sweep && order <= 8 {
        for mask in 1u32..(1 << order) {
            let mut s = procrustes.clone();
            for (i, q) in s.iter_mut().enumerate() {
                if mask & (1 << i) != 0 {
                    let last = q.ncols() - 1;
                    q.column_mut(last).neg_mut();
                }
            }
            starts.push(s);
        }
    }
    let mut rng = rng_from_seed(cfg.seed);
    for r in 1..cfg.n_restarts {
        if r == 1 {
            starts.push(ranks.iter().map(|&k| DMatrix::identity(k, k)).collect());
        } else {
            starts.push(ranks.iter().map(|&k| haar_orthogonal_from(&mut rng, k)).collect());
        }
    }
    Ok(starts)
}

/// Best local minimum over the Procrustes start, its component flips and the restarts.
pub fn ls_distance(p: &AlignmentProblem, cfg: &GdConfig) -> Result<AlignmentResult> {
    cfg.validate()?;
    let ws = Workspace::new(p);
    let starts = starting_points(p, cfg)?;
    let restarts_used = starts.len();
    let best = starts
        .into_iter()
        .map(|s| descend(&ws, s, cfg))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    Ok(AlignmentResult {
        e_hat: best.value.max(0.0).sqrt(),
        converged: best.grad_norm <= cfg.grad_tol,
        rotations: best.rotations,
        iterations: best.iterations,
        final_grad_norm: best.grad_norm,
        restarts_used,
        objective_trace: best.trace,
    })
}
