//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p lscond --test acceptance -- --nocapture` to see them.

use rand::Rng;

use lscond::distance::{
    alignment_gradient, alignment_objective, ls_distance, ls_distance_bruteforce_2d, retract,
    GdConfig,
};
use lscond::experiment::{
    generate_decomposition, measure, mix_seed, project_perturbation, run_experiment, summarize,
    ExperimentConfig, ModelParams,
};
use lscond::fcre::{kappa_ls, subproblem_kappas, JacobianBlocks, RowSubset};
use lscond::linalg::{
    gaussian_matrix, rng_from_seed, rng_orthonormal, singular_values, unit_tensor_from,
    DenseMatrix, RankPolicy,
};
use lscond::tucker::{
    cond_tucker, cond_tucker_oracle, random_decomposition, tucker_fiber_rotate, tucker_jacobian,
    Metric,
};
use lscond::two_factor::{balanced_factorization, cond_two_factor, cond_two_factor_oracle};
use lscond::verify::{exhaustive_sign_distance, random_alignment_problem, random_pair, random_tucker_shape};

fn report(name: &str, passed: bool, detail: String) {
    println!("[{}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "{name} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn two_factor_oracle_equivalence() {
    let shapes = [(4, 3, 2), (5, 5, 5), (6, 4, 4), (3, 3, 1)];
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let (m, n, k) = shapes[i as usize % shapes.len()];
        let p = random_pair(m, n, k, 1000 + i).unwrap();
        worst = worst.max(rel(cond_two_factor(&p).unwrap().kappa, cond_two_factor_oracle(&p).unwrap()));
    }
    report(
        "two-factor closed form = Jacobian oracle (1000 instances, rel 1e-8)",
        worst <= 1e-8,
        format!("max relative error {worst:.3e}"),
    );
}

#[test]
fn balanced_factorization_optimality() {
    let mut rng = rng_from_seed(77);
    let mut worst_formula: f64 = 0.0;
    let mut violations = 0;
    for i in 0..100u64 {
        let m = rng.random_range(3..=7);
        let n = rng.random_range(3..=7);
        let k = rng.random_range(1..m.min(n));
        let x = gaussian_matrix(m, k, 10 * i) * gaussian_matrix(k, n, 10 * i + 1);
        let sigma_k = singular_values(&x).unwrap()[k - 1];
        let bal = balanced_factorization(&x, k).unwrap();
        let kb = cond_two_factor(&bal).unwrap().kappa;
        worst_formula = worst_formula.max(rel(kb, sigma_k.powf(-0.5)));
        for j in 0..100u64 {
            let mm = gaussian_matrix(k, k, mix_seed(&[i, j]));
            let Ok(other) = bal.reparametrize(&mm) else { continue };
            if cond_two_factor(&other).unwrap().kappa < kb * (1.0 - 1e-10) {
                violations += 1;
            }
        }
    }
    report(
        "balanced factorization attains sigma_k^{-1/2} and is optimal (100 x 100)",
        worst_formula <= 1e-10 && violations == 0,
        format!("max relative error {worst_formula:.3e}, {violations} reparametrizations below it"),
    );
}

/// Greedy multiset inclusion of `needles` in `haystack` with tolerance `tol`;
/// returns the largest matched deviation or `None` if some needle is unmatched.
fn multiset_inclusion(mut needles: Vec<f64>, mut haystack: Vec<f64>, tol: f64) -> Option<f64> {
    needles.sort_by(f64::total_cmp);
    haystack.sort_by(f64::total_cmp);
    let mut p = 0;
    let mut worst: f64 = 0.0;
    for e in needles {
        while p < haystack.len() && haystack[p] < e - tol {
            p += 1;
        }
        if p == haystack.len() || (haystack[p] - e).abs() > tol {
            return None;
        }
        worst = worst.max((haystack[p] - e).abs());
        p += 1;
    }
    Some(worst)
}

#[test]
fn tucker_oracle_equivalence() {
    let mut worst = [0.0f64; 2];
    let mut worst_block: f64 = 0.0;
    let mut block_failures = 0;
    for i in 0..300u64 {
        let s = mix_seed(&[2024, i]);
        let (dims, ranks) = random_tucker_shape(s);
        let scale = 0.2 + 3.0 * rng_from_seed(s ^ 1).random::<f64>();
        let d = random_decomposition(&dims, &ranks, scale, s ^ 2).unwrap();
        let rep = cond_tucker(&d).unwrap();
        for (w, metric) in worst.iter_mut().zip([Metric::Absolute, Metric::Relative]) {
            *w = w.max(rel(rep.kappa(metric), cond_tucker_oracle(&d, metric).unwrap()));
            let alpha = match metric {
                Metric::Absolute => 1.0,
                Metric::Relative => d.core().norm(),
            };
            let mut expected = Vec::new();
            for (mode, (&n, &k)) in dims.iter().zip(&ranks).enumerate() {
                let sv = singular_values(&d.core().unfold(mode).unwrap()).unwrap();
                for _ in 0..n - k {
                    expected.extend(sv.iter().map(|v| v / alpha));
                }
            }
            let spectrum = singular_values(&tucker_jacobian(&d, metric).unwrap()).unwrap();
            match multiset_inclusion(expected, spectrum, 1e-10) {
                Some(e) => worst_block = worst_block.max(e),
                None => block_failures += 1,
            }
        }
    }
    report(
        "tucker closed form = tangent-basis oracle (300 decompositions, rel 1e-8)",
        worst[0] <= 1e-8 && worst[1] <= 1e-8,
        format!("max relative error absolute {:.3e}, relative {:.3e}", worst[0], worst[1]),
    );
    report(
        "tucker block spectrum contained in Jacobian spectrum (tol 1e-10)",
        block_failures == 0,
        format!("{block_failures} failures, max deviation {worst_block:.3e}"),
    );
}

#[test]
fn invariance_suite() {
    let mut fiber: f64 = 0.0;
    for i in 0..100u64 {
        let d = random_decomposition(&[5, 4, 6], &[3, 2, 3], 1.3, 500 + i).unwrap();
        let qs: Vec<DenseMatrix> = d
            .ranks()
            .iter()
            .enumerate()
            .map(|(j, &k)| rng_orthonormal(k, k, mix_seed(&[i, j as u64])).unwrap())
            .collect();
        let a = cond_tucker(&d).unwrap();
        let b = cond_tucker(&tucker_fiber_rotate(&d, &qs).unwrap()).unwrap();
        fiber = fiber.max(rel(b.kappa_abs, a.kappa_abs)).max(rel(b.kappa_rel, a.kappa_rel));
    }
    report(
        "tucker fiber rotations leave kappa invariant (rel 1e-10)",
        fiber <= 1e-10,
        format!("max relative change {fiber:.3e}"),
    );

    let mut ok: f64 = 0.0;
    for i in 0..100u64 {
        let p = random_pair(6, 5, 3, 900 + i).unwrap();
        let q = rng_orthonormal(3, 3, 7000 + i).unwrap();
        ok = ok.max(rel(
            cond_two_factor(&p.rotate(&q).unwrap()).unwrap().kappa,
            cond_two_factor(&p).unwrap().kappa,
        ));
    }
    report(
        "two-factor O(k) rotations leave kappa invariant (rel 1e-10)",
        ok <= 1e-10,
        format!("max relative change {ok:.3e}"),
    );

    let mut scale: f64 = 0.0;
    let mut basis: f64 = 0.0;
    for i in 0..100u64 {
        let (z, nx, ny, r) = (5, 4, 6, 3);
        let dfdx = gaussian_matrix(z, nx, 3 * i);
        let dfdy = gaussian_matrix(z, r, 3 * i + 1) * gaussian_matrix(r, ny, 3 * i + 2);
        let policy = RankPolicy::structural(r);
        let k0 = kappa_ls(&JacobianBlocks::new(dfdx.clone(), dfdy.clone(), policy).unwrap()).unwrap().kappa;
        let c = 10f64.powf(rng_from_seed(i).random_range(-3.0..3.0)) * if i % 2 == 0 { 1.0 } else { -1.0 };
        let kc = kappa_ls(&JacobianBlocks::new(&dfdx * c, &dfdy * c, policy).unwrap()).unwrap().kappa;
        scale = scale.max(rel(kc, k0));
        let qy = rng_orthonormal(ny, ny, 100 + i).unwrap();
        let qx = rng_orthonormal(nx, nx, 200 + i).unwrap();
        let pz = rng_orthonormal(z, z, 300 + i).unwrap();
        let kq = kappa_ls(&JacobianBlocks::new(&pz * &dfdx * &qx, &pz * &dfdy * &qy, policy).unwrap())
            .unwrap()
            .kappa;
        basis = basis.max(rel(kq, k0));
    }
    report(
        "engine scale invariance (rel 1e-12)",
        scale <= 1e-12,
        format!("max relative change {scale:.3e}"),
    );
    report(
        "engine orthogonal-basis invariance (rel 1e-12)",
        basis <= 1e-12,
        format!("max relative change {basis:.3e}"),
    );

    // nested row subsets of consistent systems: a subproblem never has a larger kappa
    let mut rng = rng_from_seed(4242);
    let mut violations = 0;
    let mut chains = 0;
    for i in 0..1000u64 {
        let z = rng.random_range(2..=6);
        let ny = z + rng.random_range(0..=2);
        let nx = rng.random_range(1..=5);
        let blocks = JacobianBlocks::new(
            gaussian_matrix(z, nx, mix_seed(&[i, 0])),
            gaussian_matrix(z, ny, mix_seed(&[i, 1])),
            RankPolicy::structural(z),
        )
        .unwrap();
        let mut order: Vec<usize> = (0..z).collect();
        for j in (1..z).rev() {
            order.swap(j, rng.random_range(0..=j));
        }
        let subsets: Vec<RowSubset> = (1..=z)
            .map(|len| RowSubset::new(order[..len].to_vec(), RankPolicy::structural(len)))
            .collect();
        let kappas: Vec<f64> = subproblem_kappas(&blocks, &subsets).unwrap().iter().map(|r| r.kappa).collect();
        chains += 1;
        if kappas.windows(2).any(|w| w[0] > w[1] * (1.0 + 1e-10)) {
            violations += 1;
        }
    }
    report(
        "subproblem monotonicity on random affine systems (1000 chains, slack 1e-10)",
        violations == 0 && chains == 1000,
        format!("{violations} violating chains"),
    );
}

#[test]
fn alignment_solver() {
    let gd = GdConfig::default();
    let mut worst_sign: f64 = 0.0;
    for i in 0..50u64 {
        let p = random_alignment_problem(&[4, 3, 5], &[1, 1, 1], 300 + i).unwrap();
        let e = ls_distance(&p, &gd).unwrap().e_hat;
        worst_sign = worst_sign.max((e - exhaustive_sign_distance(&p).unwrap()).abs());
    }
    report(
        "k=1 solver = exhaustive sign oracle (50 instances, abs 1e-10)",
        worst_sign <= 1e-10,
        format!("max deviation {worst_sign:.3e}"),
    );

    let mut worst_grid: f64 = 0.0;
    for i in 0..50u64 {
        let p = random_alignment_problem(&[4, 4, 4], &[2, 2, 2], 600 + i).unwrap();
        let e = ls_distance(&p, &gd).unwrap().e_hat;
        worst_grid = worst_grid.max((e - ls_distance_bruteforce_2d(&p).unwrap()).abs());
    }
    report(
        "k=(2,2,2) solver = grid oracle (50 instances, abs 1e-5)",
        worst_grid <= 1e-5,
        format!("max deviation {worst_grid:.3e}"),
    );

    let mut worst_fd: f64 = 0.0;
    for i in 0..50u64 {
        let p = random_alignment_problem(&[5, 4, 5], &[3, 2, 3], 900 + i).unwrap();
        let ranks = p.ranks();
        let qs: Vec<DenseMatrix> = ranks
            .iter()
            .enumerate()
            .map(|(j, &k)| rng_orthonormal(k, k, mix_seed(&[i, j as u64, 1])).unwrap())
            .collect();
        let xi: Vec<DenseMatrix> = qs
            .iter()
            .enumerate()
            .map(|(j, q)| {
                let w = gaussian_matrix(q.nrows(), q.nrows(), mix_seed(&[i, j as u64, 2]));
                q * (&w - w.transpose())
            })
            .collect();
        let g = alignment_gradient(&p, &qs).unwrap();
        let analytic: f64 = g.iter().zip(&xi).map(|(a, b)| a.dot(b)).sum();
        let h = 1e-6;
        let fd = (alignment_objective(&p, &retract(&qs, &xi, -h)).unwrap()
            - alignment_objective(&p, &retract(&qs, &xi, h)).unwrap())
            / (2.0 * h);
        worst_fd = worst_fd.max((fd - analytic).abs() / (1.0 + analytic.abs()));
    }
    report(
        "Riemannian gradient = finite differences (50 points, 1e-6)",
        worst_fd <= 1e-6,
        format!("max deviation {worst_fd:.3e}"),
    );
}

#[test]
fn scaled_experiment() {
    let cfg = ExperimentConfig {
        dims: vec![5, 5, 5],
        k: 3,
        alphas: vec![1e-4, 1.0],
        epsilons: vec![1e-10, 1e-7, 1e-4],
        samples_per_cell: 200,
        base_seed: 20240611,
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&cfg).unwrap();
    let summary = summarize(&records);
    let g = &summary.global;
    report(
        "experiment (a): fraction of kappa*alpha in [1, 100] >= 0.85",
        g.kappa_alpha_frac_in_1_100 >= 0.85,
        format!("{:.4}", g.kappa_alpha_frac_in_1_100),
    );
    report(
        "experiment (b): geometric mean of kappa*alpha in [6, 24]",
        (6.0..=24.0).contains(&g.kappa_alpha_geomean),
        format!("{:.3}", g.kappa_alpha_geomean),
    );
    let eligible: Vec<_> = summary.cells.iter().filter(|c| c.eligible).collect();
    let mut below = Vec::new();
    let mut medians = Vec::new();
    for c in &eligible {
        let ratios: Vec<f64> = records
            .iter()
            .filter(|r| r.converged && r.alpha == c.alpha && r.epsilon == c.epsilon)
            .map(|r| r.ratio)
            .collect();
        below.push(ratios.iter().filter(|&&r| r <= 1.05).count() as f64 / ratios.len() as f64);
        medians.push(c.ratio_quantiles.unwrap().q50);
    }
    let cells: Vec<String> = eligible.iter().map(|c| format!("({:e}, {:e})", c.alpha, c.epsilon)).collect();
    report(
        "experiment (c): every eligible cell has >= 95% of ratios <= 1.05",
        !eligible.is_empty() && below.iter().all(|&f| f >= 0.95),
        format!("eligible cells {cells:?}, fractions {below:.4?}"),
    );
    report(
        "experiment (d): median ratio >= 0.05 in every eligible cell",
        !eligible.is_empty() && medians.iter().all(|&m| m >= 0.05),
        format!("medians {medians:.4?}"),
    );
    let unconverged = records.iter().filter(|r| !r.converged).count();
    println!("        {} samples, {unconverged} unconverged", records.len());
}

#[test]
fn first_order_slope() {
    let params = ModelParams {
        k: 3,
        dims: vec![5, 5, 5],
        alpha: 1e-2,
    };
    let gd = GdConfig::default();
    let epsilons = [1e-5, 1e-7, 1e-9];
    let mut within = 0;
    let mut monotone = 0;
    for i in 0..20u64 {
        let d0 = generate_decomposition(&params, mix_seed(&[31337, i])).unwrap();
        let mut rng = rng_from_seed(mix_seed(&[31337, i, 1]));
        let dx = unit_tensor_from(&mut rng, &d0.dims());
        let mut slopes = Vec::new();
        let mut kappa = 0.0;
        for &eps in &epsilons {
            let (x, d) = project_perturbation(&d0, eps, &dx).unwrap();
            let m = measure(&d0, &x, &d, &gd).unwrap();
            kappa = m.kappa;
            slopes.push(m.e_hat / m.dist_x);
        }
        if slopes[2] <= 1.05 * kappa {
            within += 1;
        }
        if slopes.windows(2).all(|w| w[1] <= w[0] * 1.05) {
            monotone += 1;
        }
    }
    println!("        slopes non-increasing toward the limit for {monotone} of 20 instances");
    report(
        "slope E/dist <= 1.05 kappa at eps = 1e-9 for >= 18 of 20 instances",
        within >= 18,
        format!("{within} of 20"),
    );
}
