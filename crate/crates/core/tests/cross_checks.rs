//! Cross-module checks on the public API.

use nalgebra::DMatrix;

use lscond::distance::{ls_distance_bruteforce_2d, AlignmentProblem};
use lscond::experiment::{
    generate_decomposition, perturb_and_project, run_cell, summarize, ExperimentConfig, ModelParams,
};
use lscond::fcre::{finite_difference_jacobian, kappa_ls, JacobianBlocks};
use lscond::linalg::RankPolicy;
use lscond::tucker::{cond_tucker, random_decomposition, tucker_coordinate_map, tucker_jacobian, tucker_reconstruct, Metric};
use lscond::two_factor::{cond_two_factor, structural_rank, two_factor_jacobian};
use lscond::verify::random_pair;

#[test]
fn engine_on_two_factor_blocks_matches_closed_form() {
    // the oracle through the generic engine with dF/dx = -I
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let p = random_pair(5, 4, 2, 4000 + i).unwrap();
        let j = two_factor_jacobian(&p);
        let r = structural_rank(5, 4, 2);
        let blocks = JacobianBlocks::new(-DMatrix::identity(j.nrows(), j.nrows()), j, RankPolicy::structural(r)).unwrap();
        let (a, b) = (kappa_ls(&blocks).unwrap().kappa, cond_two_factor(&p).unwrap().kappa);
        worst = worst.max((a - b).abs() / b);
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn tucker_map_finite_differences_match_analytic_jacobian() {
    let d = random_decomposition(&[5, 5, 5], &[3, 3, 3], 1.0, 12).unwrap();
    for metric in [Metric::Absolute, Metric::Relative] {
        let j = tucker_jacobian(&d, metric).unwrap();
        let fd = finite_difference_jacobian(tucker_coordinate_map(&d, metric).unwrap(), &vec![0.0; j.ncols()], 1e-5)
            .unwrap();
        assert!((fd - j).abs().max() <= 1e-6);
    }
}

#[test]
fn grid_oracle_respects_first_order_bound() {
    let params = ModelParams {
        k: 2,
        dims: vec![4, 4, 4],
        alpha: 0.5,
    };
    for seed in 0..3 {
        let d0 = generate_decomposition(&params, seed).unwrap();
        let (x, d) = perturb_and_project(&d0, 1e-3, seed + 100).unwrap();
        let kappa = cond_tucker(&d0).unwrap().kappa_rel;
        let dist = tucker_reconstruct(&d0).unwrap().distance(&x).unwrap();
        let e = ls_distance_bruteforce_2d(&AlignmentProblem::new(d0, d).unwrap()).unwrap();
        assert!(e <= 1.5 * kappa * dist, "{e} vs {}", kappa * dist);
    }
}

fn cell_config(samples: usize) -> ExperimentConfig {
    ExperimentConfig {
        samples_per_cell: samples,
        base_seed: 99,
        ..ExperimentConfig::default()
    }
}

#[test]
fn kappa_alpha_statistics_in_a_single_cell() {
    let records = run_cell(&cell_config(200), 1e-4, 1e-8).unwrap();
    let g = summarize(&records).global;
    assert!(g.kappa_alpha_frac_in_1_100 >= 0.85, "{}", g.kappa_alpha_frac_in_1_100);
    assert!((6.0..=24.0).contains(&g.kappa_alpha_geomean), "{}", g.kappa_alpha_geomean);
}

#[test]
fn median_ratio_at_the_edge_of_the_linear_regime() {
    let records = run_cell(&cell_config(100), 1e-4, 1e-5).unwrap();
    let q = summarize(&records).cells[0].ratio_quantiles.unwrap();
    assert!((0.05..=1.0).contains(&q.q50), "{}", q.q50);
}
