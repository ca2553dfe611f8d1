//! Closed form versus explicit-Jacobian cross-checks on seeded random instances.

use serde::{Deserialize, Serialize};

use rand::Rng;

use crate::distance::{
    alignment_objective, ls_distance, ls_distance_bruteforce_2d, AlignmentProblem, GdConfig,
};
use crate::error::{Error, Result};
use crate::experiment::mix_seed;
use crate::linalg::{gaussian_matrix, rng_from_seed, DenseMatrix};
use crate::tucker::{cond_tucker, cond_tucker_oracle, random_decomposition, Metric};
use crate::two_factor::{cond_two_factor, cond_two_factor_oracle, TwoFactorPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    TwoFactor,
    Tucker,
    Alignment,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-factor" => Ok(Suite::TwoFactor),
            "tucker" => Ok(Suite::Tucker),
            "alignment" => Ok(Suite::Alignment),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidInput(format!(
                "unknown suite {s:?} (two-factor, tucker, alignment, all)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub n: usize,
    pub tolerance: f64,
    pub max_error: f64,
    pub failures: usize,
    pub passed: bool,
}

struct Tally {
    check: &'static str,
    tolerance: f64,
    n: usize,
    max_error: f64,
    failures: usize,
}

impl Tally {
    fn new(check: &'static str, tolerance: f64) -> Self {
        Tally {
            check,
            tolerance,
            n: 0,
            max_error: 0.0,
            failures: 0,
        }
    }

    fn record(&mut self, error: f64) {
        self.n += 1;
        if !(error <= self.tolerance) {
            self.failures += 1;
        }
        // NaN counts as a failure and as an infinite error
        self.max_error = self.max_error.max(if error.is_nan() { f64::INFINITY } else { error });
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            check: self.check.to_string(),
            n: self.n,
            tolerance: self.tolerance,
            max_error: self.max_error,
            failures: self.failures,
            passed: self.failures == 0 && self.n > 0,
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub const TWO_FACTOR_SHAPES: [(usize, usize, usize); 4] = [(4, 3, 2), (5, 5, 5), (6, 4, 4), (3, 3, 1)];

/// Gaussian `L ∈ ℝ^{m×k}`, `R ∈ ℝ^{k×n}`.
pub fn random_pair(m: usize, n: usize, k: usize, seed: u64) -> Result<TwoFactorPair> {
    TwoFactorPair::new(
        gaussian_matrix(m, k, mix_seed(&[seed, 0])),
        gaussian_matrix(k, n, mix_seed(&[seed, 1])),
    )
}

pub fn check_two_factor(n: usize, seed: u64) -> Result<CheckReport> {
    let mut t = Tally::new("two-factor closed form vs Jacobian oracle", 1e-8);
    for i in 0..n {
        let (m, nn, k) = TWO_FACTOR_SHAPES[i % TWO_FACTOR_SHAPES.len()];
        let p = random_pair(m, nn, k, mix_seed(&[seed, i as u64]))?;
        t.record(rel_err(cond_two_factor(&p)?.kappa, cond_two_factor_oracle(&p)?));
    }
    Ok(t.finish())
}

/// Random order-3 shape with `n_i ≤ 6`, `k_i ≤ 3`, a feasible multilinear rank
/// and at least one `k_i < n_i`.
pub fn random_tucker_shape(seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = rng_from_seed(seed);
    loop {
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(1..=6)).collect();
        let ranks: Vec<usize> = dims.iter().map(|&n| rng.random_range(1..=n.min(3))).collect();
        let product: usize = ranks.iter().product();
        let feasible = ranks.iter().all(|&k| k * k <= product);
        if feasible && dims.iter().zip(&ranks).any(|(n, k)| k < n) {
            return (dims, ranks);
        }
    }
}

pub fn check_tucker(n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut abs = Tally::new("tucker closed form vs oracle (absolute metric)", 1e-8);
    let mut rel = Tally::new("tucker closed form vs oracle (relative metric)", 1e-8);
    for i in 0..n {
        let s = mix_seed(&[seed, i as u64]);
        let (dims, ranks) = random_tucker_shape(s);
        let scale = 0.2 + 3.0 * rng_from_seed(s ^ 1).random::<f64>();
        let d = random_decomposition(&dims, &ranks, scale, s ^ 2)?;
        let rep = cond_tucker(&d)?;
        abs.record(rel_err(rep.kappa_abs, cond_tucker_oracle(&d, Metric::Absolute)?));
        rel.record(rel_err(rep.kappa_rel, cond_tucker_oracle(&d, Metric::Relative)?));
    }
    Ok(vec![abs.finish(), rel.finish()])
}

/// `min` over the `2^D` sign patterns for an all-`k_i = 1` problem.
pub fn exhaustive_sign_distance(p: &AlignmentProblem) -> Result<f64> {
    let order = p.ranks().len();
    if p.ranks().iter().any(|&k| k != 1) {
        return Err(Error::Unsupported("sign enumeration needs every k_i = 1".into()));
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << order) {
        let q: Vec<DenseMatrix> = (0..order)
            .map(|i| DenseMatrix::from_element(1, 1, if mask & (1 << i) != 0 { -1.0 } else { 1.0 }))
            .collect();
        best = best.min(alignment_objective(p, &q)?);
    }
    Ok(best.max(0.0).sqrt())
}

/// Reference and an independently drawn candidate of the same shape.
pub fn random_alignment_problem(dims: &[usize], ranks: &[usize], seed: u64) -> Result<AlignmentProblem> {
    let a = random_decomposition(dims, ranks, 1.0, mix_seed(&[seed, 0]))?;
    let b = random_decomposition(dims, ranks, 1.0, mix_seed(&[seed, 1]))?;
    AlignmentProblem::new(a, b)
}

pub fn check_alignment(n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let gd = GdConfig::default();
    let mut signs = Tally::new("alignment k=1 vs sign enumeration", 1e-10);
    let mut grid = Tally::new("alignment k=2 vs grid search", 1e-5);
    for i in 0..n {
        let s = mix_seed(&[seed, i as u64]);
        let p = random_alignment_problem(&[4, 3, 5], &[1, 1, 1], s)?;
        signs.record((ls_distance(&p, &gd)?.e_hat - exhaustive_sign_distance(&p)?).abs());
        let p = random_alignment_problem(&[4, 4, 4], &[2, 2, 2], s ^ 0x5eed)?;
        grid.record((ls_distance(&p, &gd)?.e_hat - ls_distance_bruteforce_2d(&p)?).abs());
    }
    Ok(vec![signs.finish(), grid.finish()])
}

pub fn run_suite(suite: Suite, n: usize, seed: u64) -> Result<Vec<CheckReport>> {
    Ok(match suite {
        Suite::TwoFactor => vec![check_two_factor(n, seed)?],
        Suite::Tucker => check_tucker(n, seed)?,
        Suite::Alignment => check_alignment(n, seed)?,
        Suite::All => {
            let mut out = vec![check_two_factor(n, seed)?];
            out.extend(check_tucker(n, seed)?);
            out.extend(check_alignment(n, seed)?);
            out
        }
    })
}
