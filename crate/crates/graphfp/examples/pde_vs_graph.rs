//! Compare the graph jump process against its continuum drift-diffusion
//! limit, solved with finite differences on a reference grid.
//!
//! Both sides start from a point mass at the same location. At each
//! snapshot time the evolved graph distribution is smoothed onto the grid
//! with a Gaussian mollifier and compared to the grid solution in L1. The
//! long-time graph state is also held against the closed-form steady state
//! `rho^{beta/(1-beta)}` and against the same power of a kernel density
//! estimate built from the sample; the estimate wins because it shares the
//! sample's finite-n bias.
//!
//! Run with: cargo run --release -p graphfp --example pde_vs_graph

use graphfp::continuum::{
    fp_solve_1d, fp_steady_state_compare, maxwellian_exact, maxwellian_kde, DensityField, Grid1D,
};
use graphfp::datasets::density;
use graphfp::dynamics::{evolve, EvolveMethod};
use graphfp::graph::build_proximity_graph;
use graphfp::rates::{build_generator, ConstantPreset, GeneratorSelect};
use ndarray::Array1;

fn main() -> graphfp::Result<()> {
    let beta = 0.5;
    let den = density("two_bump")?;
    let cloud = den.sample(204, 0)?;
    let (lo, hi) = den.domain.intervals[0];

    let graph = build_proximity_graph(&cloud, None, None)?;
    let built = build_generator(
        &cloud,
        &graph,
        GeneratorSelect::Beta(beta),
        ConstantPreset::Experiment,
        None,
        Some(hi - lo),
    )?;
    // Mollifier bandwidth: the KDE bandwidth the generator resolved.
    let gamma = built.delta.expect("the interpolated generator runs a KDE");

    let grid = Grid1D::new(lo, hi, 200)?;
    let rho = DensityField::from_fn(grid.clone(), |x| den.eval(&[x]))?;

    // Matched point-mass starts: the suggested seed location on the grid,
    // the nearest sample on the graph.
    let x0 = den.default_dirac_init().expect("two_bump suggests a seed")[0];
    let node = (0..cloud.len())
        .min_by(|&i, &j| {
            let a = (cloud.points[[i, 0]] - x0).abs();
            let b = (cloud.points[[j, 0]] - x0).abs();
            a.partial_cmp(&b).unwrap()
        })
        .unwrap();
    let f0 = DensityField::dirac(grid.clone(), cloud.points[[node, 0]])?;
    let mut u0 = Array1::zeros(cloud.len());
    u0[node] = 1.0;

    let positions = cloud.points.column(0).to_owned();
    println!(
        "two-well density, n = {}, beta = {beta}, grid m = {}, start x = {:.4}",
        cloud.len(),
        grid.m,
        cloud.points[[node, 0]],
    );
    println!("L1 gap between smoothed graph state and grid solution:");
    for t in [0.5, 2.0, 8.0] {
        let u_t = evolve(&built.rate, &u0, t, EvolveMethod::MatrixExp)?;
        let f_t = fp_solve_1d(&rho, beta, &f0, t)?;
        let l1 = fp_steady_state_compare(&positions, &u_t, &f_t, gamma)?;
        println!("  t = {t:<4}  L1 = {l1:.4}");
    }

    let u_inf = evolve(&built.rate, &u0, 500.0, EvolveMethod::MatrixExp)?;
    let exact = maxwellian_exact(&rho, beta)?;
    let kde = maxwellian_kde(&cloud, gamma, beta, &grid)?;
    let l1_exact = fp_steady_state_compare(&positions, &u_inf, &exact, gamma)?;
    let l1_kde = fp_steady_state_compare(&positions, &u_inf, &kde, gamma)?;
    println!("long-time state (t = 500) against the two steady-state references:");
    println!("  closed form from the true density: L1 = {l1_exact:.4}");
    println!("  same power of the sample KDE:      L1 = {l1_kde:.4}");
    Ok(())
}
