//! Three uniform discs joined left-to-right by two bridges: a narrow
//! high-density strip on the left pair and a wide low-density slab on the
//! right pair. With k = 2 the pipeline must sever exactly one bridge.
//! Diffusion-heavy dynamics pay for cut length, so they sever the narrow
//! strip; drift-heavy dynamics pay for cutting through dense regions, so
//! they sever the sparse wide slab. Raising the drift weight beta across
//! roughly 0.3 relocates the cut from one bridge to the other.
//!
//! Each blob's majority cluster label is read off against the component
//! labels; the severed bridge is the adjacent pair whose majorities
//! disagree.
//!
//! Run with: cargo run --release -p graphfp --example three_blobs_bridges

use graphfp::clustering::{cluster_dynamic, DynamicConfig};
use graphfp::datasets::density;
use graphfp::rates::GeneratorSelect;

fn main() -> graphfp::Result<()> {
    let den = density("three_blobs")?;
    let cloud = den.sample(966, 0)?;
    let truth = cloud.labels.clone().expect("synthetic samples carry labels");

    // Order the components by mean x so the report reads left to right.
    let mut mean_x = [(0.0f64, 0usize); 3];
    for (i, &c) in truth.iter().enumerate() {
        mean_x[c].0 += cloud.points[[i, 0]];
        mean_x[c].1 += 1;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let xa = mean_x[a].0 / mean_x[a].1 as f64;
        let xb = mean_x[b].0 / mean_x[b].1 as f64;
        xa.partial_cmp(&xb).unwrap()
    });
    let names = ["left", "middle", "right"];

    println!("three blobs with two bridges, n = {}, t = 10, k = 2", cloud.len());
    for beta in [0.25, 0.75] {
        let cfg = DynamicConfig {
            generator: GeneratorSelect::Beta(beta),
            epsilon: Some(0.07),
            delta: Some(0.05),
            t: 10.0,
            ..DynamicConfig::default()
        };
        let run = cluster_dynamic(&cloud, &cfg)?;

        // Majority cluster label inside each blob.
        let mut votes = [[0usize; 2]; 3];
        for (i, &c) in truth.iter().enumerate() {
            votes[c][run.clustering.labels[i]] += 1;
        }
        let majority: Vec<usize> = order
            .iter()
            .map(|&c| if votes[c][1] > votes[c][0] { 1 } else { 0 })
            .collect();

        print!("  beta = {beta}: majorities");
        for (pos, m) in majority.iter().enumerate() {
            print!(" {} = {m}", names[pos]);
        }
        for pair in 0..2 {
            if majority[pair] != majority[pair + 1] {
                print!("  -> cut between {} and {}", names[pair], names[pair + 1]);
            }
        }
        println!();
    }
    Ok(())
}
