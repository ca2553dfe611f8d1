use serde::{Deserialize, Serialize};

use super::SampleRecord;

/// Samples with `Ê` below this are dominated by the solver tolerance.
pub const E_HAT_FLOOR: f64 = 5e-8;
/// Minimum fraction of samples satisfying each filter for a cell to be eligible.
pub const ELIGIBLE_FRACTION: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Quantiles {
    /// Linear interpolation between order statistics; `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Quantiles {
            q05: q(0.05),
            q25: q(0.25),
            q50: q(0.5),
            q75: q(0.75),
            q95: q(0.95),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dataset_id: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub n_samples: usize,
    pub n_converged: usize,
    /// Quantiles of the ratio over converged samples.
    pub ratio_quantiles: Option<Quantiles>,
    pub frac_e_hat_above_floor: f64,
    pub frac_kappa_dist_at_most_one: f64,
    pub eligible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalSummary {
    pub n_samples: usize,
    pub n_converged: usize,
    /// Over every sample with a computed condition number.
    pub kappa_alpha_geomean: f64,
    pub kappa_alpha_frac_in_1_100: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub cells: Vec<CellSummary>,
    pub global: GlobalSummary,
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

fn summarize_cell(cell: &[&SampleRecord]) -> CellSummary {
    let first = cell[0];
    let converged: Vec<&SampleRecord> = cell.iter().copied().filter(|r| r.converged).collect();
    let n = converged.len();
    let ratios: Vec<f64> = converged.iter().map(|r| r.ratio).collect();
    let above_floor = fraction(converged.iter().filter(|r| r.e_hat >= E_HAT_FLOOR).count(), n);
    let small = fraction(
        converged.iter().filter(|r| r.kappa * r.dist_x <= 1.0).count(),
        n,
    );
    CellSummary {
        dataset_id: first.dataset_id.clone(),
        alpha: first.alpha,
        epsilon: first.epsilon,
        n_samples: cell.len(),
        n_converged: n,
        ratio_quantiles: Quantiles::of(&ratios),
        frac_e_hat_above_floor: above_floor,
        frac_kappa_dist_at_most_one: small,
        eligible: n > 0 && above_floor >= ELIGIBLE_FRACTION && small >= ELIGIBLE_FRACTION,
    }
}

/// Per-cell statistics over converged samples and global `κα` statistics.
/// Cells are keyed by `(dataset_id, alpha, epsilon)` in order of first appearance.
pub fn summarize(records: &[SampleRecord]) -> SummaryReport {
    let mut keys: Vec<(&str, u64, u64)> = Vec::new();
    let mut groups: Vec<Vec<&SampleRecord>> = Vec::new();
    for r in records {
        let key = (r.dataset_id.as_str(), r.alpha.to_bits(), r.epsilon.to_bits());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(key);
                groups.push(vec![r]);
            }
        }
    }
    let ka: Vec<f64> = records
        .iter()
        .filter(|r| r.kappa > 0.0 && r.kappa.is_finite())
        .map(|r| r.kappa * r.alpha)
        .collect();
    let geomean = if ka.is_empty() {
        0.0
    } else {
        (ka.iter().map(|v| v.ln()).sum::<f64>() / ka.len() as f64).exp()
    };
    SummaryReport {
        cells: groups.iter().map(|g| summarize_cell(g)).collect(),
        global: GlobalSummary {
            n_samples: records.len(),
            n_converged: records.iter().filter(|r| r.converged).count(),
            kappa_alpha_geomean: geomean,
            kappa_alpha_frac_in_1_100: fraction(
                ka.iter().filter(|v| (1.0..=100.0).contains(*v)).count(),
                ka.len(),
            ),
        },
    }
}
