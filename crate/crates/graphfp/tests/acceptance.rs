//! Acceptance suite: one test per shipped guarantee, each printing exactly
//! one `criterion NN <name>: PASS/FAIL (<measurements>)` line. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines for
//! passing tests too; failing tests always show theirs.
//!
//! The seed-ensemble tests (06-10) reproduce qualitative claims on ten
//! resamples each, so they quote counts like `8/10` rather than a single
//! number.

use std::time::Instant;

use graphfp::clustering::{
    adjusted_rand_index, cluster_dynamic, energy_profile, DynamicConfig,
};
use graphfp::continuum::{
    fp_generator_1d, fp_solve_1d, fp_steady_state_compare, maxwellian_exact, maxwellian_kde,
    witten_matrix_1d, witten_product_check, DensityField, Grid1D, SplitAxis,
};
use graphfp::datasets::density;
use graphfp::dynamics::{
    diffusion_distance, embed_all, evolve, l2_distance, spectral_basis, spectral_embedding,
    spectral_reconstruct, EvolveMethod,
};
use graphfp::experiment::{self, ExperimentConfig};
use graphfp::graph::{
    build_proximity_graph, kde_at_samples, resolve_kde_bandwidth, PointCloud, WeightedGraph,
};
use graphfp::rates::{
    beta_from_alpha, q_beta, q_knf, q_mean_shift, q_neg_unnormalized_laplacian, q_quickshift,
    q_rw_alpha, q_rw_limit, ConstantPreset, GeneratorSelect, RateMatrix,
};
use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Centralized tolerances, quoted in the printed lines where they bind.
const ROW_SUM_TOL: f64 = 1e-10;
const EQUIV_TOL: f64 = 1e-6;
const LIMIT_TOL: f64 = 1e-8;
const DIST_TOL: f64 = 1e-6;
const STEP_DROP_TOL: f64 = -1e-9;
const PDE_L1_TOL: f64 = 0.15;
const UNIFORM_SUP_TOL: f64 = 1e-4;
const STEADY_L1_TOL: f64 = 1e-3;
const COL_SUM_TOL: f64 = 1e-12;
const WITTEN_TOL: f64 = 1e-8;

fn verdict(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {id} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn random_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = Array2::from_shape_fn((n, dim), |_| rng.gen_range(-1.5..1.5));
    PointCloud::new(points).expect("random points are finite")
}

fn pairwise_distances(points: &Array2<f64>) -> Array2<f64> {
    let n = points.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = 0.0;
            for c in 0..points.ncols() {
                let diff = points[[i, c]] - points[[j, c]];
                s += diff * diff;
            }
            let dist = s.sqrt();
            d[[i, j]] = dist;
            d[[j, i]] = dist;
        }
    }
    d
}

fn dirac_at_nearest(cloud: &PointCloud, x0: f64) -> (Array1<f64>, usize) {
    let mut node = 0;
    let mut best = f64::INFINITY;
    for i in 0..cloud.len() {
        let d = (cloud.points[[i, 0]] - x0).abs();
        if d < best {
            best = d;
            node = i;
        }
    }
    let mut u0 = Array1::zeros(cloud.len());
    u0[node] = 1.0;
    (u0, node)
}

#[test]
fn criterion_01_generator_invariants() {
    let start = Instant::now();
    let mut worst_row_sum = 0.0_f64;
    let mut worst_off_diag = 0.0_f64; // most negative off-diagonal seen
    let mut built = 0_usize;
    for g in 0..200_u64 {
        let n = 5 + (g as usize * 7) % 46;
        let dim = 1 + (g as usize) % 2;
        let cloud = random_cloud(n, dim, 1000 + g);
        let graph = build_proximity_graph(&cloud, None, None).unwrap();
        let rho = kde_at_samples(&cloud.points, 0.4).unwrap();
        let d_hat = pairwise_distances(&cloud.points);
        let alpha = [1.0, 0.5, 0.0, -3.5][(g % 4) as usize];
        let beta = [0.0, 0.25, 0.5, 0.75, 1.0][(g % 5) as usize];
        let rates: Vec<RateMatrix> = vec![
            q_neg_unnormalized_laplacian(&graph, 1.0).unwrap(),
            q_rw_alpha(&graph, alpha, ConstantPreset::Experiment).unwrap(),
            q_mean_shift(&graph, &rho, ConstantPreset::Experiment).unwrap(),
            q_beta(&graph, &rho, beta, ConstantPreset::Experiment).unwrap(),
            q_knf(&graph, &rho, Some(&d_hat), 2.0).unwrap(),
            q_quickshift(&graph, &rho, &d_hat).unwrap(),
            q_rw_limit(&graph).unwrap(),
        ];
        for rate in &rates {
            rate.validate(ROW_SUM_TOL).unwrap();
            for i in 0..n {
                let mut sum = 0.0;
                for j in 0..n {
                    if i != j {
                        worst_off_diag = worst_off_diag.min(rate.q[[i, j]]);
                    }
                    sum += rate.q[[i, j]];
                }
                worst_row_sum = worst_row_sum.max(sum.abs());
            }
            built += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_row_sum <= ROW_SUM_TOL && worst_off_diag >= 0.0 && elapsed < 10.0;
    let detail = format!(
        "{built} generators over 200 graphs, max |row sum| = {worst_row_sum:.2e}, \
         min off-diagonal = {worst_off_diag:.2e}, {elapsed:.1}s"
    );
    assert!(verdict("01", "generator invariants", ok, &detail), "{detail}");
}

#[test]
fn criterion_02_markov_rows_equal_spectral_series() {
    let start = Instant::now();
    let mut max_dev = 0.0_f64;
    for &n in &[50_usize, 100, 200] {
        let cloud = density("two_bump").unwrap().sample(n, n as u64).unwrap();
        let graph = build_proximity_graph(&cloud, None, None).unwrap();
        for &alpha in &[1.0, 0.5, 0.0, -3.5] {
            let q = q_rw_alpha(&graph, alpha, ConstantPreset::Experiment).unwrap();
            let basis = spectral_basis(&graph, alpha, n, ConstantPreset::Experiment).unwrap();
            for &t in &[0.1, 1.0, 10.0] {
                let rows = embed_all(&q, t).unwrap();
                for i in 0..n {
                    let recon = spectral_reconstruct(&basis, t, i).unwrap();
                    for j in 0..n {
                        max_dev = max_dev.max((rows.vectors[[i, j]] - recon[j]).abs());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = max_dev <= EQUIV_TOL && elapsed < 30.0;
    let detail = format!(
        "n in {{50,100,200}}, alpha in {{1,0.5,0,-3.5}}, t in {{0.1,1,10}}: \
         max row deviation = {max_dev:.2e} (tol {EQUIV_TOL:.0e}), {elapsed:.1}s"
    );
    assert!(verdict("02", "evolved rows match spectral series", ok, &detail), "{detail}");
}

/// Symmetric Sinkhorn scaling of a random positive matrix to geometrically
/// decaying degrees, so every node has a unique max-degree neighbor and the
/// worst neighbor-degree ratio stays well under 1.
fn geometric_degree_graph(n: usize, ratio: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(0.5..1.5);
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    let target: Vec<f64> = (0..n).map(|k| ratio.powi(k as i32)).collect();
    for _ in 0..5000 {
        let deg = w.sum_axis(Axis(1));
        let s: Vec<f64> = (0..n).map(|i| (target[i] / deg[i]).sqrt()).collect();
        for i in 0..n {
            for j in 0..n {
                w[[i, j]] *= s[i] * s[j];
            }
        }
    }
    WeightedGraph::from_weights(w).unwrap()
}

#[test]
fn criterion_03_deep_exponent_limit() {
    let start = Instant::now();
    let graph = geometric_degree_graph(20, 0.58, 11);
    // Precondition: the worst ratio between a row's two largest neighbor
    // degrees bounds the convergence rate; require <= 0.9.
    let mut worst_ratio = 0.0_f64;
    for x in 0..20 {
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for z in 0..20 {
            if graph.weights[[x, z]] > 0.0 {
                let d = graph.degrees[z];
                if d > best {
                    second = best;
                    best = d;
                } else if d > second {
                    second = d;
                }
            }
        }
        worst_ratio = worst_ratio.max(second / best);
    }
    let limit = q_rw_limit(&graph).unwrap();
    let dev_at = |alpha: f64| -> f64 {
        let q = q_rw_alpha(&graph, alpha, ConstantPreset::Unit).unwrap();
        let mut dev = 0.0_f64;
        for i in 0..20 {
            for j in 0..20 {
                dev = dev.max((q.q[[i, j]] - limit.q[[i, j]]).abs());
            }
        }
        dev
    };
    let (e10, e30, e50) = (dev_at(-10.0), dev_at(-30.0), dev_at(-50.0));
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_ratio <= 0.9 && e10 > e30 && e30 > e50 && e50 <= LIMIT_TOL && elapsed < 5.0;
    let detail = format!(
        "neighbor-degree ratio = {worst_ratio:.2}, deviations {e10:.2e} > {e30:.2e} > {e50:.2e} \
         (tol {LIMIT_TOL:.0e} at -50), {elapsed:.1}s"
    );
    assert!(verdict("03", "deep reweighing exponent limit", ok, &detail), "{detail}");
}

#[test]
fn criterion_04_embedding_distances_are_diffusion_distances() {
    let n = 100;
    let cloud = density("two_bump").unwrap().sample(n, 7).unwrap();
    let graph = build_proximity_graph(&cloud, None, None).unwrap();
    let mut max_dev = 0.0_f64;
    for &alpha in &[1.0, 0.5, -0.5] {
        let q = q_rw_alpha(&graph, alpha, ConstantPreset::Experiment).unwrap();
        let basis = spectral_basis(&graph, alpha, n, ConstantPreset::Experiment).unwrap();
        let markov = embed_all(&q, 1.0).unwrap();
        let spectral = spectral_embedding(&basis, 1.0, n).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let a = l2_distance(
                    &spectral.vectors.row(i).to_owned(),
                    &spectral.vectors.row(j).to_owned(),
                )
                .unwrap();
                let b = diffusion_distance(
                    &markov.vectors.row(i).to_owned(),
                    &markov.vectors.row(j).to_owned(),
                    &basis.d_alpha,
                )
                .unwrap();
                max_dev = max_dev.max((a - b).abs());
            }
        }
    }
    let ok = max_dev <= DIST_TOL;
    let detail = format!(
        "n = 100, alpha in {{1,0.5,-0.5}}, all pairs: \
         max |embedding l2 - diffusion distance| = {max_dev:.2e} (tol {DIST_TOL:.0e})"
    );
    assert!(verdict("04", "diffusion distance identity", ok, &detail), "{detail}");
}

#[test]
fn criterion_05_drift_objective_monotone() {
    let mut worst_drop = f64::INFINITY; // most negative step-to-step change
    for f in 0..50_u64 {
        let n = 10 + (f as usize * 3) % 31;
        let dim = 1 + (f as usize) % 2;
        let cloud = random_cloud(n, dim, 9000 + f);
        let graph = build_proximity_graph(&cloud, None, None).unwrap();
        let rho = kde_at_samples(&cloud.points, 0.4).unwrap();
        let q = q_mean_shift(&graph, &rho, ConstantPreset::Experiment).unwrap();
        let b = rho.mapv(|r| -1.0 / r);
        let mut rng = ChaCha8Rng::seed_from_u64(f);
        let mut u0 = Array1::from_shape_fn(n, |_| rng.gen_range(0.05..1.0_f64));
        let mass: f64 = u0.sum();
        u0.mapv_inplace(|v| v / mass);
        let mut prev = b.dot(&u0);
        for j in 0..20 {
            // 20 geometric times spanning 1e-2 .. 1e2
            let t = 1e-2 * 10f64.powf(4.0 * j as f64 / 19.0);
            let u = evolve(&q, &u0, t, EvolveMethod::MatrixExp).unwrap();
            let val = b.dot(&u);
            worst_drop = worst_drop.min(val - prev);
            prev = val;
        }
    }
    let ok = worst_drop >= STEP_DROP_TOL;
    let detail = format!(
        "50 fixtures x 20 geometric times: worst step change of the drift objective \
         = {worst_drop:.2e} (tolerance {STEP_DROP_TOL:.0e})"
    );
    assert!(verdict("05", "drift objective monotone", ok, &detail), "{detail}");
}

#[test]
fn criterion_06_graph_dynamics_match_grid_solver() {
    let start = Instant::now();
    let den = density("two_bump").unwrap();
    let grid = Grid1D::new(-1.5, 1.5, 200).unwrap();
    let rho = DensityField::from_fn(grid.clone(), |x| den.eval(&[x])).unwrap();
    let x0 = den.default_dirac_init().unwrap()[0];
    let betas = [0.0, 0.25, 0.5, 0.75];
    let mut seeds_ok = 0;
    let mut worst_counts = [0_usize; 4];
    for seed in 0..10_u64 {
        let cloud = den.sample(625, seed).unwrap();
        let graph = build_proximity_graph(&cloud, None, None).unwrap();
        let delta = resolve_kde_bandwidth(&cloud, None, Some(3.0)).unwrap();
        let rho_hat = kde_at_samples(&cloud.points, delta).unwrap();
        let (u0, node) = dirac_at_nearest(&cloud, x0);
        let f0 = DensityField::dirac(grid.clone(), cloud.points[[node, 0]]).unwrap();
        let positions = cloud.points.column(0).to_owned();
        let mut good = 0;
        for (bi, &beta) in betas.iter().enumerate() {
            let q = q_beta(&graph, &rho_hat, beta, ConstantPreset::Experiment).unwrap();
            let u = evolve(&q, &u0, 8.0, EvolveMethod::MatrixExp).unwrap();
            let f = fp_solve_1d(&rho, beta, &f0, 8.0).unwrap();
            let l1 = fp_steady_state_compare(&positions, &u, &f, delta).unwrap();
            if l1 <= PDE_L1_TOL {
                good += 1;
                worst_counts[bi] += 1;
            }
        }
        if good >= 3 {
            seeds_ok += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = seeds_ok >= 8 && elapsed < 300.0;
    let detail = format!(
        "n = 625, t = 8: seeds with >= 3/4 drift weights under smoothed-L1 {PDE_L1_TOL}: \
         {seeds_ok}/10 (per-weight passes {worst_counts:?}), {elapsed:.0}s"
    );
    assert!(verdict("06", "graph dynamics track the grid solver", ok, &detail), "{detail}");
}

#[test]
fn criterion_07_long_time_state_prefers_sample_kde_reference() {
    let den = density("two_bump").unwrap();
    let grid = Grid1D::new(-1.5, 1.5, 200).unwrap();
    let rho = DensityField::from_fn(grid.clone(), |x| den.eval(&[x])).unwrap();
    let x0 = den.default_dirac_init().unwrap()[0];
    let alphas = [0.83, 0.5, -0.5];
    let mut wins = [0_usize; 3];
    for seed in 0..10_u64 {
        let cloud = den.sample(625, seed).unwrap();
        let graph = build_proximity_graph(&cloud, None, None).unwrap();
        let eps = graph.epsilon.unwrap();
        let (u0, _) = dirac_at_nearest(&cloud, x0);
        let positions = cloud.points.column(0).to_owned();
        for (ai, &alpha) in alphas.iter().enumerate() {
            let q = q_rw_alpha(&graph, alpha, ConstantPreset::Experiment).unwrap();
            let u = evolve(&q, &u0, 500.0, EvolveMethod::MatrixExp).unwrap();
            let beta = beta_from_alpha(alpha).unwrap();
            let exact = maxwellian_exact(&rho, beta).unwrap();
            let kde_ref = maxwellian_kde(&cloud, eps, beta, &grid).unwrap();
            let l1_exact = fp_steady_state_compare(&positions, &u, &exact, eps).unwrap();
            let l1_kde = fp_steady_state_compare(&positions, &u, &kde_ref, eps).unwrap();
            if l1_kde < l1_exact {
                wins[ai] += 1;
            }
        }
    }
    let ok = wins.iter().all(|&w| w >= 8);
    let detail = format!(
        "n = 625, t = 500: seeds where the sample-KDE reference beats the closed form, \
         per alpha {{0.83, 0.5, -0.5}}: {wins:?} (need >= 8/10 each)"
    );
    assert!(verdict("07", "long-time state tracks the sampled density", ok, &detail), "{detail}");
}

#[test]
fn criterion_08_two_well_clustering_ensemble() {
    let den = density("two_bump").unwrap();
    let mut exact_high = 0; // drift-heavy runs recovering the wells exactly
    let mut low_geometry = 0; // diffusion-heavy runs scoring <= 0.6
    let mut plateau = 0; // energy profile: k=2 drop then flat k=3
    for seed in 0..10_u64 {
        let cloud = den.sample(204, seed).unwrap();
        let truth = cloud.labels.clone().unwrap();
        let cfg_high = DynamicConfig {
            generator: GeneratorSelect::Beta(0.9),
            t: 10.0,
            seed,
            ..DynamicConfig::default()
        };
        let run = cluster_dynamic(&cloud, &cfg_high).unwrap();
        let ari_high = adjusted_rand_index(&run.clustering.labels, &truth).unwrap();
        if ari_high >= 1.0 - 1e-12 {
            exact_high += 1;
        }
        let cfg_low = DynamicConfig {
            generator: GeneratorSelect::Beta(0.25),
            t: 10.0,
            seed,
            ..DynamicConfig::default()
        };
        let run = cluster_dynamic(&cloud, &cfg_low).unwrap();
        let ari_low = adjusted_rand_index(&run.clustering.labels, &truth).unwrap();
        if ari_low <= 0.6 {
            low_geometry += 1;
        }
        let profile = energy_profile(&cloud, &cfg_high, 3).unwrap();
        let (e2, e3) = (profile[1].normalized, profile[2].normalized);
        if e2 <= 0.5 && e3 >= 0.8 * e2 {
            plateau += 1;
        }
    }
    let ok = exact_high >= 8 && low_geometry >= 8 && plateau >= 8;
    let detail = format!(
        "n = 204, t = 10: exact recovery at drift weight 0.9 on {exact_high}/10 seeds \
         (need >= 8), score <= 0.6 at 0.25 on {low_geometry}/10 (need >= 8), \
         k = 3 energy plateau on {plateau}/10 (need >= 8)"
    );
    assert!(verdict("08", "two-well clustering ensemble", ok, &detail), "{detail}");
}

#[test]
fn criterion_09_twin_strips_ensemble() {
    let start = Instant::now();
    let den = density("blue_sky").unwrap();
    let mut split_high = 0; // drift-heavy: separates the strips
    let mut vertical_low = 0; // diffusion-heavy: ignores the strips
    for seed in 0..10_u64 {
        let cloud = den.sample(965, seed).unwrap();
        let truth = cloud.labels.clone().unwrap();
        for (beta, tally) in [(0.95, &mut split_high), (0.20, &mut vertical_low)] {
            let cfg = DynamicConfig {
                generator: GeneratorSelect::Beta(beta),
                epsilon: Some(0.04),
                delta: Some(0.10),
                t: 10.0,
                seed,
                ..DynamicConfig::default()
            };
            let run = cluster_dynamic(&cloud, &cfg).unwrap();
            let ari = adjusted_rand_index(&run.clustering.labels, &truth).unwrap();
            if beta > 0.5 && ari >= 0.9 {
                *tally += 1;
            }
            if beta < 0.5 && ari <= 0.2 {
                *tally += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = split_high >= 7 && vertical_low >= 7 && elapsed < 600.0;
    let detail = format!(
        "n = 965, bandwidth 0.04, t = 10: strip separation (score >= 0.9) at drift 0.95 \
         on {split_high}/10 seeds (need >= 7); cross cut (score <= 0.2) at drift 0.20 \
         on {vertical_low}/10 (need >= 7); {elapsed:.0}s"
    );
    assert!(verdict("09", "twin strips ensemble", ok, &detail), "{detail}");
}

/// Majority cluster label among the points inside each disc, left to right.
fn blob_majorities(cloud: &PointCloud, labels: &[usize]) -> [usize; 3] {
    let centers = [(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)];
    let mut out = [0_usize; 3];
    for (b, &(cx, cy)) in centers.iter().enumerate() {
        let mut votes = [0_usize; 2];
        for i in 0..cloud.len() {
            let dx = cloud.points[[i, 0]] - cx;
            let dy = cloud.points[[i, 1]] - cy;
            if dx * dx + dy * dy <= 0.25 * 0.25 {
                votes[labels[i]] += 1;
            }
        }
        out[b] = if votes[1] > votes[0] { 1 } else { 0 };
    }
    out
}

#[test]
fn criterion_10_bridge_severing_ensemble() {
    let den = density("three_blobs").unwrap();
    let mut narrow_at_070 = 0; // cut between left and middle discs
    let mut wide_at_075 = 0; // cut between middle and right discs
    for seed in 0..10_u64 {
        let cloud = den.sample(966, seed).unwrap();
        for (beta, tally, want_narrow) in [
            (0.70, &mut narrow_at_070, true),
            (0.75, &mut wide_at_075, false),
        ] {
            let cfg = DynamicConfig {
                generator: GeneratorSelect::Beta(beta),
                epsilon: Some(0.07),
                delta: Some(0.05),
                t: 10.0,
                seed,
                ..DynamicConfig::default()
            };
            let run = cluster_dynamic(&cloud, &cfg).unwrap();
            let m = blob_majorities(&cloud, &run.clustering.labels);
            let severed_narrow = m[0] != m[1] && m[1] == m[2];
            let severed_wide = m[0] == m[1] && m[1] != m[2];
            if (want_narrow && severed_narrow) || (!want_narrow && severed_wide) {
                *tally += 1;
            }
        }
    }
    let ok = narrow_at_070 >= 7 && wide_at_075 >= 7;
    let detail = format!(
        "n = 966, t = 10, k = 2: narrow high-density bridge severed at drift 0.70 on \
         {narrow_at_070}/10 seeds (need >= 7); wide low-density bridge severed at 0.75 \
         on {wide_at_075}/10 (need >= 7)"
    );
    assert!(verdict("10", "bridge severing ensemble", ok, &detail), "{detail}");
}

#[test]
fn criterion_11_grid_solver_exact_properties() {
    let start = Instant::now();
    let den = density("two_bump").unwrap();
    let grid = Grid1D::new(-1.5, 1.5, 200).unwrap();
    let rho = DensityField::from_fn(grid.clone(), |x| den.eval(&[x])).unwrap();
    let mut max_col_sum = 0.0_f64;
    for &beta in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let g = fp_generator_1d(&rho, beta).unwrap();
        for j in 0..grid.m {
            let s: f64 = (0..grid.m).map(|i| g[[i, j]]).sum();
            max_col_sum = max_col_sum.max(s.abs());
        }
    }
    let f0 = DensityField::dirac(grid.clone(), -0.1).unwrap();
    let diffusion_only = fp_solve_1d(&rho, 0.0, &f0, 20.0).unwrap();
    let uniform_sup = diffusion_only
        .values
        .iter()
        .map(|&v| (v - 1.0 / 3.0).abs())
        .fold(0.0_f64, f64::max);
    let balanced = fp_solve_1d(&rho, 0.5, &f0, 50.0).unwrap();
    let steady_l1 = balanced
        .l1_distance(&rho.clone().normalized().unwrap())
        .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = max_col_sum <= COL_SUM_TOL
        && uniform_sup <= UNIFORM_SUP_TOL
        && steady_l1 <= STEADY_L1_TOL
        && elapsed < 30.0;
    let detail = format!(
        "max |column sum| = {max_col_sum:.2e} (tol {COL_SUM_TOL:.0e}); pure diffusion at \
         t = 20 is uniform to {uniform_sup:.2e} (tol {UNIFORM_SUP_TOL:.0e}); balanced drift \
         steady state matches the density to L1 = {steady_l1:.2e} (tol {STEADY_L1_TOL:.0e}); \
         {elapsed:.1}s"
    );
    assert!(verdict("11", "grid solver exact properties", ok, &detail), "{detail}");
}

#[test]
fn criterion_12_symmetrized_operator_structure() {
    // 1-D operator on the two-well density: symmetric, PSD, kernel dim 1.
    let den = density("two_bump").unwrap();
    let grid = Grid1D::new(-1.5, 1.5, 160).unwrap();
    let rho = DensityField::from_fn(grid.clone(), |x| den.eval(&[x])).unwrap();
    let s = witten_matrix_1d(&rho, 0.5).unwrap();
    let m = grid.m;
    let mut asym = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            asym = asym.max((s[[i, j]] - s[[j, i]]).abs());
        }
    }
    let sym = nalgebra::DMatrix::from_fn(m, m, |i, j| s[[i, j]]);
    let eigs = sym.symmetric_eigen().eigenvalues;
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let smallest_abs = eigs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);

    // Separable 2-D density: the tensor spectrum is exactly the sum set.
    let ga = Grid1D::new(-1.0, 1.0, 18).unwrap();
    let gb = Grid1D::new(-1.0, 1.0, 16).unwrap();
    let ra = DensityField::from_fn(ga, |x| 1.0 + 0.3 * (std::f64::consts::PI * x / 2.0).cos())
        .unwrap()
        .normalized()
        .unwrap();
    let rb = DensityField::from_fn(gb, |x| 1.0 + 0.4 * (std::f64::consts::PI * x).sin().powi(2))
        .unwrap()
        .normalized()
        .unwrap();
    let product = witten_product_check(&ra, &rb, 0.5).unwrap();

    // Twin-strip marginals at heavy drift: the strip axis owns the slow mode.
    let (fx, fy) = density("blue_sky").unwrap().marginal_factors().unwrap();
    let gx = Grid1D::new(-1.5, 1.5, 24).unwrap();
    let gy = Grid1D::new(-1.0, 1.0, 24).unwrap();
    let rx = DensityField::from_fn(gx, |x| fx.eval(&[x])).unwrap();
    let ry = DensityField::from_fn(gy, |y| fy.eval(&[y])).unwrap();
    let strips = witten_product_check(&rx, &ry, 0.95).unwrap();

    let ok = asym <= 1e-12
        && smallest_abs <= WITTEN_TOL
        && min_eig >= -WITTEN_TOL
        && product.kronecker_max_dev <= WITTEN_TOL
        && strips.kronecker_max_dev <= WITTEN_TOL
        && strips.preferred == SplitAxis::Y
        && strips.lambda_y[1] < strips.lambda_x[1];
    let detail = format!(
        "asymmetry = {asym:.1e}; smallest |eigenvalue| = {smallest_abs:.1e} and min = \
         {min_eig:.1e} (tol {WITTEN_TOL:.0e}); tensor-vs-sum-set deviations {:.1e} and {:.1e}; \
         strip marginals slow mode on Y ({:.3e} < {:.3e})",
        product.kronecker_max_dev,
        strips.kronecker_max_dev,
        strips.lambda_y[1],
        strips.lambda_x[1]
    );
    assert!(verdict("12", "symmetrized operator structure", ok, &detail), "{detail}");
}

fn collect_csvs(dir: &std::path::Path, root: &std::path::Path, out: &mut Vec<(String, Vec<u8>)>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_csvs(&path, root, out);
        } else if path.extension().is_some_and(|e| e == "csv") {
            let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
            out.push((rel, std::fs::read(&path).unwrap()));
        }
    }
    out.sort();
}

#[test]
fn criterion_13_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ExperimentConfig {
        n: 120,
        t: vec![1.0, 10.0],
        k: vec![2, 3],
        grid_m: 96,
        emit_pde_compare: true,
        emit_witten: true,
        ..ExperimentConfig::default()
    };
    let mut mismatches = Vec::new();
    let mut compared = 0_usize;

    // Full single run, twice.
    for (label, builder) in [
        ("run", None),
        ("sweep", Some(["0.25", "0.9"])),
    ] {
        let mut files = Vec::new();
        for pass in 0..2 {
            let out = tmp.path().join(format!("{label}_{pass}"));
            let mut cfg = base.clone();
            cfg.out = out.to_string_lossy().into_owned();
            match builder {
                None => {
                    experiment::run(&cfg).unwrap();
                }
                Some(values) => {
                    let values: Vec<String> = values.iter().map(|s| s.to_string()).collect();
                    experiment::sweep(&cfg, "beta", &values).unwrap();
                }
            }
            let mut got = Vec::new();
            collect_csvs(&out, &out, &mut got);
            files.push(got);
        }
        let (a, b) = (&files[0], &files[1]);
        if a.len() != b.len() {
            mismatches.push(format!("{label}: {} vs {} files", a.len(), b.len()));
        }
        for ((na, ca), (nb, cb)) in a.iter().zip(b.iter()) {
            compared += 1;
            if na != nb || ca != cb {
                mismatches.push(format!("{label}: {na} differs from {nb}"));
            }
        }
    }
    let ok = mismatches.is_empty() && compared > 0;
    let detail = format!(
        "{compared} CSV artifacts compared across rerun pairs (full run + sweep); \
         mismatches: {:?}",
        mismatches
    );
    assert!(verdict("13", "reruns are byte-identical", ok, &detail), "{detail}");
}
