//! Seeded Monte-Carlo perturbation pipeline.
//!
//! For every `(α, ε)` cell and sample: draw an ill-conditioned reference
//! decomposition with `‖X₀‖_F = 1`, perturb `X₀` by `ε` in a uniform direction,
//! project back with ST-HOSVD, and compare the fiber-aligned distance `Ê` with
//! the first-order bound `κ·‖X − X₀‖_F`.

mod output;
mod summary;

pub use output::{read_records_csv, records_to_csv, write_records_csv, write_summary_json};
pub use summary::{summarize, CellSummary, GlobalSummary, Quantiles, SummaryReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{ls_distance, AlignmentProblem, GdConfig};
use crate::error::{Error, Result};
use crate::linalg::{
    gaussian_matrix_from, orthonormal_from, rng_from_seed, unit_tensor_from, DenseMatrix,
    DenseTensor,
};
use crate::tucker::{cond_tucker, st_hosvd, tucker_reconstruct, TuckerDecomposition};

/// Redraw budget for degenerate model draws and truncations.
const MAX_REDRAWS: u64 = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub k: usize,
    pub dims: Vec<usize>,
    pub alpha: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 {
            return Err(Error::InvalidInput("need at least two modes".into()));
        }
        if self.k == 0 || self.dims.iter().any(|&n| n < self.k) {
            return Err(Error::InvalidInput(format!(
                "k = {} must satisfy 1 ≤ k ≤ min(dims) for dims {:?}",
                self.k, self.dims
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Label written to every record; defaults to `n<dims[0]>`.
    pub dataset_id: Option<String>,
    pub k: usize,
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub samples_per_cell: usize,
    pub base_seed: u64,
    pub gd: GdConfig,
}

/// `10^{-14}, 10^{-12.5}, …, 10^{-2}`.
pub fn default_epsilons() -> Vec<f64> {
    (0..9).map(|j| 10f64.powf(-14.0 + 1.5 * j as f64)).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset_id: None,
            k: 3,
            dims: vec![5, 5, 5],
            alphas: vec![1e-8, 1e-4, 1.0],
            epsilons: default_epsilons(),
            samples_per_cell: 2000,
            base_seed: 0,
            gd: GdConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.epsilons.is_empty() {
            return Err(Error::InvalidInput("alpha and epsilon grids must be non-empty".into()));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::InvalidInput("samples_per_cell must be at least 1".into()));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {e}")));
        }
        for &alpha in &self.alphas {
            self.params(alpha).validate()?;
        }
        self.gd.validate()
    }

    pub fn params(&self, alpha: f64) -> ModelParams {
        ModelParams {
            k: self.k,
            dims: self.dims.clone(),
            alpha,
        }
    }

    pub fn dataset_id(&self) -> String {
        self.dataset_id
            .clone()
            .unwrap_or_else(|| format!("n{}", self.dims.first().copied().unwrap_or(0)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub dataset_id: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub sample_index: usize,
    pub seed: u64,
    pub kappa: f64,
    pub dist_x: f64,
    pub e_hat: f64,
    pub ratio: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts_used: usize,
}

impl SampleRecord {
    pub fn recompute_ratio(&self) -> f64 {
        bound_ratio(self.e_hat, self.kappa, self.dist_x)
    }
}

fn bound_ratio(e_hat: f64, kappa: f64, dist_x: f64) -> f64 {
    let denom = kappa * dist_x;
    if denom > 0.0 {
        e_hat / denom
    } else {
        0.0
    }
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a word sequence.
pub fn mix_seed(words: &[u64]) -> u64 {
    words.iter().fold(0x6A09_E667_F3BC_C908, |h, &w| mix64(h ^ mix64(w)))
}

pub fn sample_seed(base_seed: u64, alpha: f64, epsilon: f64, index: usize) -> u64 {
    mix_seed(&[base_seed, alpha.to_bits(), epsilon.to_bits(), index as u64])
}

fn draw_decomposition(params: &ModelParams, seed: u64) -> Result<TuckerDecomposition> {
    let k = params.k;
    let order = params.dims.len();
    let mut rng = rng_from_seed(seed);
    let a = gaussian_matrix_from(&mut rng, k, k - 1);
    let b = gaussian_matrix_from(&mut rng, k, k - 1);
    let h = unit_tensor_from(&mut rng, &vec![k; order]);
    let shift = &a * b.transpose() + DenseMatrix::identity(k, k) * params.alpha;
    let s = h.mode_product(0, &shift)?;
    let norm = s.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateSystem);
    }
    let core = s.scale(1.0 / norm);
    let factors = params
        .dims
        .iter()
        .map(|&n| orthonormal_from(&mut rng, n, k))
        .collect::<Result<Vec<_>>>()?;
    TuckerDecomposition::new(factors, core)
}

/// Reference decomposition `(U_i⁰, S₀)` with `S₀_(1) ∝ (ABᵀ + αI) H_(1)`, `‖S₀‖_F = 1`
/// and `U_i⁰` the Q-factor of a Gaussian `n_i × k` matrix.
///
/// The Gaussian `H` is drawn normalised; the scale cancels in the normalisation of `S₀`.
/// A draw whose core is not of full multilinear rank is redrawn from the next sub-seed.
pub fn generate_decomposition(params: &ModelParams, seed: u64) -> Result<TuckerDecomposition> {
    params.validate()?;
    let mut last = Error::DegenerateSystem;
    for attempt in 0..MAX_REDRAWS {
        match draw_decomposition(params, mix_seed(&[seed, attempt])) {
            Ok(d) => return Ok(d),
            Err(e) => {
                log::debug!("model draw {attempt} for seed {seed} rejected: {e}");
                last = e;
            }
        }
    }
    Err(last)
}

/// `st_hosvd(X₀ + ε ΔX)` for a given direction, together with its reconstruction `X`.
pub fn project_perturbation(
    d0: &TuckerDecomposition,
    epsilon: f64,
    direction: &DenseTensor,
) -> Result<(DenseTensor, TuckerDecomposition)> {
    let x0 = tucker_reconstruct(d0)?;
    let perturbed = x0.axpy(epsilon, direction)?;
    let d = st_hosvd(&perturbed, &d0.ranks())?;
    Ok((tucker_reconstruct(&d)?, d))
}

/// Uniform unit direction `ΔX`, then [`project_perturbation`]; a degenerate
/// truncation redraws `ΔX` from the next sub-seed.
pub fn perturb_and_project(
    d0: &TuckerDecomposition,
    epsilon: f64,
    seed: u64,
) -> Result<(DenseTensor, TuckerDecomposition)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut last = Error::DegenerateSystem;
    for attempt in 0..MAX_REDRAWS {
        let mut rng = rng_from_seed(mix_seed(&[seed, attempt]));
        let direction = unit_tensor_from(&mut rng, &d0.dims());
        match project_perturbation(d0, epsilon, &direction) {
            Ok(out) => return Ok(out),
            Err(e @ Error::DegenerateTruncation(_)) => {
                log::debug!("perturbation {attempt} for seed {seed} rejected: {e}");
                last = e;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Measured quantities of one reference/perturbation pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub kappa: f64,
    pub dist_x: f64,
    pub e_hat: f64,
    pub ratio: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts_used: usize,
}

/// κ (relative metric) at `d0`, `‖X − X₀‖_F` and `Ê(d0, d)`.
pub fn measure(
    d0: &TuckerDecomposition,
    x: &DenseTensor,
    d: &TuckerDecomposition,
    gd: &GdConfig,
) -> Result<Measurement> {
    let kappa = cond_tucker(d0)?.kappa_rel;
    let dist_x = tucker_reconstruct(d0)?.distance(x)?;
    let res = ls_distance(&AlignmentProblem::new(d0.clone(), d.clone())?, gd)?;
    Ok(Measurement {
        kappa,
        dist_x,
        e_hat: res.e_hat,
        ratio: bound_ratio(res.e_hat, kappa, dist_x),
        converged: res.converged,
        iterations: res.iterations,
        restarts_used: res.restarts_used,
    })
}

fn run_sample(cfg: &ExperimentConfig, alpha: f64, epsilon: f64, index: usize) -> SampleRecord {
    let seed = sample_seed(cfg.base_seed, alpha, epsilon, index);
    let gd = GdConfig {
        seed: mix_seed(&[seed, 3]),
        ..cfg.gd.clone()
    };
    let outcome = generate_decomposition(&cfg.params(alpha), mix_seed(&[seed, 1])).and_then(|d0| {
        let (x, d) = perturb_and_project(&d0, epsilon, mix_seed(&[seed, 2]))?;
        measure(&d0, &x, &d, &gd)
    });
    let m = outcome.unwrap_or_else(|e| {
        log::warn!("sample {index} of cell (alpha={alpha}, epsilon={epsilon}) failed: {e}");
        Measurement {
            kappa: 0.0,
            dist_x: 0.0,
            e_hat: 0.0,
            ratio: 0.0,
            converged: false,
            iterations: 0,
            restarts_used: 0,
        }
    });
    SampleRecord {
        dataset_id: cfg.dataset_id(),
        alpha,
        epsilon,
        sample_index: index,
        seed,
        kappa: m.kappa,
        dist_x: m.dist_x,
        e_hat: m.e_hat,
        ratio: m.ratio,
        converged: m.converged,
        iterations: m.iterations,
        restarts_used: m.restarts_used,
    }
}

/// All samples of one cell, ordered by sample index.
pub fn run_cell(cfg: &ExperimentConfig, alpha: f64, epsilon: f64) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    Ok((0..cfg.samples_per_cell)
        .into_par_iter()
        .map(|i| run_sample(cfg, alpha, epsilon, i))
        .collect())
}

/// Every cell, ordered by alpha, then epsilon (config order), then sample index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SampleRecord>> {
    cfg.validate()?;
    let jobs: Vec<(f64, f64, usize)> = cfg
        .alphas
        .iter()
        .flat_map(|&a| {
            cfg.epsilons
                .iter()
                .flat_map(move |&e| (0..cfg.samples_per_cell).map(move |i| (a, e, i)))
        })
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(a, e, i)| run_sample(cfg, a, e, i))
        .collect())
}
