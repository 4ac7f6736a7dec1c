//! Three identities tying the reweighed random walk to its spectral and
//! deep-exponent descriptions.
//!
//! First, evolving a point mass with the matrix exponential agrees with
//! summing the spectral series of the reweighed Laplacian, for every
//! exponent. Second, Euclidean distance between full spectral embedding
//! rows equals the degree-weighted distance between the evolved rows, so
//! k-means in the embedding clusters in the diffusion metric. Third, as
//! the exponent goes deeply negative the generator converges to a
//! hill-climbing walk that routes each node to its highest-degree
//! neighbor.
//!
//! Run with: cargo run --release -p graphfp --example diffusion_maps_limit

use graphfp::dynamics::{
    diffusion_distance, evolve, l2_distance, spectral_basis, spectral_embedding,
    spectral_reconstruct, EvolveMethod,
};
use graphfp::datasets::density;
use graphfp::graph::{build_proximity_graph, WeightedGraph};
use graphfp::rates::{q_rw_alpha, q_rw_limit, ConstantPreset};
use ndarray::{Array1, Array2};

fn main() -> graphfp::Result<()> {
    let den = density("two_bump")?;
    let cloud = den.sample(100, 0)?;
    let n = cloud.len();
    let graph = build_proximity_graph(&cloud, None, None)?;
    let t = 1.0;

    println!("matrix exponential vs full spectral series, n = {n}, t = {t}:");
    for alpha in [1.0, 0.5, 0.0, -3.5] {
        let q = q_rw_alpha(&graph, alpha, ConstantPreset::Experiment)?;
        let basis = spectral_basis(&graph, alpha, n, ConstantPreset::Experiment)?;
        let mut worst = 0.0f64;
        for i in [0, n / 3, 2 * n / 3, n - 1] {
            let mut u0 = Array1::zeros(n);
            u0[i] = 1.0;
            let direct = evolve(&q, &u0, t, EvolveMethod::MatrixExp)?;
            let series = spectral_reconstruct(&basis, t, i)?;
            for (a, b) in direct.iter().zip(series.iter()) {
                worst = worst.max((a - b).abs());
            }
        }
        println!("  alpha = {alpha:<4}  max row deviation = {worst:.2e}");
    }

    let alpha = 0.5;
    let q = q_rw_alpha(&graph, alpha, ConstantPreset::Experiment)?;
    let basis = spectral_basis(&graph, alpha, n, ConstantPreset::Experiment)?;
    let emb = spectral_embedding(&basis, t, n)?;
    let d_alpha = graph.reweigh(alpha)?.degrees;
    println!("embedding distance vs diffusion distance at alpha = {alpha}:");
    for (i, j) in [(0, n - 1), (20, 70)] {
        let ei = emb.vectors.row(i).to_owned();
        let ej = emb.vectors.row(j).to_owned();
        let embed_dist = l2_distance(&ei, &ej)?;
        let mut ui = Array1::zeros(n);
        ui[i] = 1.0;
        let mut uj = Array1::zeros(n);
        uj[j] = 1.0;
        let ut_i = evolve(&q, &ui, t, EvolveMethod::MatrixExp)?;
        let ut_j = evolve(&q, &uj, t, EvolveMethod::MatrixExp)?;
        let diff_dist = diffusion_distance(&ut_i, &ut_j, &d_alpha)?;
        println!(
            "  nodes ({i:2}, {j:2}): embedding = {embed_dist:.10}, diffusion = {diff_dist:.10}"
        );
    }

    // Chain with geometrically decaying edge weights: every node has a
    // clear highest-degree neighbor, so the deep-exponent limit is sharp.
    let m = 10;
    let mut w = Array2::zeros((m, m));
    for k in 0..m - 1 {
        let a = 3.0f64.powi(-(k as i32));
        w[[k, k + 1]] = a;
        w[[k + 1, k]] = a;
    }
    let chain = WeightedGraph::from_weights(w)?;
    let limit = q_rw_limit(&chain)?;
    println!("deep-exponent limit on a {m}-node chain (unit rate scale):");
    for alpha in [-10.0, -30.0, -50.0] {
        let q = q_rw_alpha(&chain, alpha, ConstantPreset::Unit)?;
        let dev = q
            .q
            .iter()
            .zip(limit.q.iter())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        println!("  alpha = {alpha:<5}  max entry deviation = {dev:.2e}");
    }
    Ok(())
}
