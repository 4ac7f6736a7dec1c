//! k-means over embedding rows, energy diagnostics, and the end-to-end
//! dynamic clustering pipeline: point cloud -> proximity graph -> generator
//! -> Markov embedding at time `t` -> k-means.

use std::collections::BTreeMap;

use ndarray::{s, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::embed_all;
use crate::graph::{build_proximity_graph, PointCloud};
use crate::rates::{build_generator, BuiltGenerator, ConstantPreset, GeneratorKind, GeneratorSelect};
use crate::{Error, Result};

/// Cap on Lloyd rounds per restart; assignments stabilize in a few dozen
/// rounds at the sizes this crate targets, and degenerate duplicate-heavy
/// inputs can oscillate between equal-energy states forever.
const MAX_LLOYD_ITERS: usize = 200;

/// Result of a k-means run over embedding rows.
#[derive(Debug, Clone)]
pub struct Clustering {
    /// Cluster index in `[0, k)` for each row. A cluster may end up empty
    /// only when the rows have fewer than `k` distinct values.
    pub labels: Vec<usize>,
    /// `k x dim` matrix of cluster centers.
    pub centers: Array2<f64>,
    /// Mean squared distance to the nearest center:
    /// `E_k = (1/n) sum_i min_m |row_i - center_m|^2`.
    pub energy: f64,
    /// `E_k / E_1`, where `E_1` is the total variance of the rows about
    /// their mean (1 by definition at k = 1, even for zero-variance input).
    pub normalized_energy: f64,
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// One entry of an energy profile: best-of-restarts k-means energy at `k`,
/// plus the same energy normalized by the k = 1 value.
#[derive(Debug, Clone, Copy)]
pub struct EnergyPoint {
    pub k: usize,
    pub energy: f64,
    pub normalized: f64,
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Mean squared distance of the rows to their mean: the k = 1 energy.
fn total_variance(rows: &Array2<f64>) -> f64 {
    let mean = rows.mean_axis(Axis(0)).expect("rows are nonempty");
    rows.rows()
        .into_iter()
        .map(|r| squared_distance(r, mean.view()))
        .sum::<f64>()
        / rows.nrows() as f64
}

/// Nearest-center assignment (ties to the lowest center index) and the mean
/// squared distance it realizes.
fn assign(rows: &Array2<f64>, centers: &Array2<f64>) -> (Vec<usize>, f64) {
    let n = rows.nrows();
    let mut labels = vec![0usize; n];
    let mut total = 0.0;
    for i in 0..n {
        let mut best = f64::INFINITY;
        let mut arg = 0usize;
        for m in 0..centers.nrows() {
            let d = squared_distance(rows.row(i), centers.row(m));
            if d < best {
                best = d;
                arg = m;
            }
        }
        labels[i] = arg;
        total += best;
    }
    (labels, total / n as f64)
}

/// Lloyd iterations from the given initial centers until the assignment is
/// stable. A cluster that loses all its points is re-seeded from the point
/// farthest from its assigned center (stealing only from clusters that keep
/// at least one point).
fn lloyd(rows: &Array2<f64>, mut centers: Array2<f64>) -> (Vec<usize>, Array2<f64>, f64) {
    let n = rows.nrows();
    let k = centers.nrows();
    let dim = rows.ncols();
    let mut labels: Vec<usize> = Vec::new();
    for _ in 0..MAX_LLOYD_ITERS {
        let (new_labels, _) = assign(rows, &centers);
        if new_labels == labels {
            break;
        }
        labels = new_labels;
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        if counts.iter().any(|&c| c == 0) {
            let d2: Vec<f64> = (0..n)
                .map(|i| squared_distance(rows.row(i), centers.row(labels[i])))
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| d2[b].total_cmp(&d2[a]));
            let mut next = 0usize;
            for m in 0..k {
                if counts[m] == 0 {
                    while counts[labels[order[next]]] < 2 {
                        next += 1;
                    }
                    let i = order[next];
                    counts[labels[i]] -= 1;
                    labels[i] = m;
                    counts[m] = 1;
                }
            }
        }
        let mut sums = Array2::zeros((k, dim));
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += &rows.row(i);
        }
        for m in 0..k {
            for j in 0..dim {
                centers[[m, j]] = sums[[m, j]] / counts[m] as f64;
            }
        }
    }
    let (labels, energy) = assign(rows, &centers);
    (labels, centers, energy)
}

/// k-means++ initialization: first center uniform, each further center drawn
/// with probability proportional to the squared distance to the nearest
/// chosen center.
fn kmeanspp_init(rows: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = rows.nrows();
    let mut centers = Array2::zeros((k, rows.ncols()));
    let first = rng.gen_range(0..n);
    centers.row_mut(0).assign(&rows.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(rows.row(i), centers.row(0)))
        .collect();
    for m in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc >= target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // remaining points all coincide with chosen centers
            rng.gen_range(0..n)
        };
        centers.row_mut(m).assign(&rows.row(pick));
        for i in 0..n {
            let d = squared_distance(rows.row(i), centers.row(m));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

/// Best-of-`restarts` k-means over the rows of `rows`, with k-means++
/// initialization and Lloyd refinement. Deterministic given `(seed,
/// restarts)`: all restarts draw from one ChaCha8 stream seeded by `seed`.
pub fn kmeans(rows: &Array2<f64>, k: usize, restarts: usize, seed: u64) -> Result<Clustering> {
    let n = rows.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("kmeans: no rows to cluster".into()));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!(
            "kmeans: k must lie in [1, {n}], got {k}"
        )));
    }
    if restarts < 1 {
        return Err(Error::InvalidInput(format!(
            "kmeans: restarts must be >= 1, got {restarts}"
        )));
    }
    if rows.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "kmeans: rows must be finite".into(),
        ));
    }
    let e1 = total_variance(rows);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, Array2<f64>, f64)> = None;
    for _ in 0..restarts {
        let init = kmeanspp_init(rows, k, &mut rng);
        let (labels, centers, energy) = lloyd(rows, init);
        if best.as_ref().map_or(true, |b| energy < b.2) {
            best = Some((labels, centers, energy));
        }
    }
    let (labels, centers, energy) = best.expect("restarts >= 1");
    let normalized_energy = if e1 > 0.0 {
        energy / e1
    } else if k == 1 {
        1.0
    } else {
        0.0
    };
    Ok(Clustering {
        labels,
        centers,
        energy,
        normalized_energy,
        k,
        restarts,
        seed,
    })
}

/// Best-of-restarts energies for k = 1..=k_max over fixed rows. Each k also
/// runs one warm-started candidate (the previous best centers plus the row
/// farthest from them), whose Lloyd refinement can only lower the previous
/// energy — so the reported profile is nonincreasing in k.
pub fn energy_profile_rows(
    rows: &Array2<f64>,
    k_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<EnergyPoint>> {
    let n = rows.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("energy_profile: no rows".into()));
    }
    if k_max < 1 || k_max > n {
        return Err(Error::InvalidInput(format!(
            "energy_profile: k_max must lie in [1, {n}], got {k_max}"
        )));
    }
    if restarts < 1 {
        return Err(Error::InvalidInput(format!(
            "energy_profile: restarts must be >= 1, got {restarts}"
        )));
    }
    let e1 = total_variance(rows);
    let norm = |e: f64, k: usize| {
        if e1 > 0.0 {
            e / e1
        } else if k == 1 {
            1.0
        } else {
            0.0
        }
    };
    let mean = rows.mean_axis(Axis(0)).expect("rows are nonempty");
    let mut prev_centers = mean.insert_axis(Axis(0));
    let mut out = vec![EnergyPoint {
        k: 1,
        energy: e1,
        normalized: norm(e1, 1),
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 2..=k_max {
        let mut far = 0usize;
        let mut far_d = -1.0;
        for i in 0..n {
            let mut nearest = f64::INFINITY;
            for m in 0..prev_centers.nrows() {
                nearest = nearest.min(squared_distance(rows.row(i), prev_centers.row(m)));
            }
            if nearest > far_d {
                far_d = nearest;
                far = i;
            }
        }
        let mut cascade = Array2::zeros((k, rows.ncols()));
        cascade.slice_mut(s![..k - 1, ..]).assign(&prev_centers);
        cascade.row_mut(k - 1).assign(&rows.row(far));
        let (_, mut centers, mut energy) = lloyd(rows, cascade);
        for _ in 0..restarts {
            let init = kmeanspp_init(rows, k, &mut rng);
            let (_, c, e) = lloyd(rows, init);
            if e < energy {
                centers = c;
                energy = e;
            }
        }
        out.push(EnergyPoint {
            k,
            energy,
            normalized: norm(energy, k),
        });
        prev_centers = centers;
    }
    Ok(out)
}

/// Adjusted Rand index between two labelings of the same points, via the
/// contingency-table form. 1 for identical partitions, ~0 for independent
/// ones; when both partitions are trivial in the same way (all one block, or
/// all singletons) they are identical and the index is 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "adjusted_rand_index: length mismatch {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput(
            "adjusted_rand_index: empty labelings".into(),
        ));
    }
    if a.len() == 1 {
        return Ok(1.0);
    }
    let comb2 = |x: f64| x * (x - 1.0) / 2.0;
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut row_counts: BTreeMap<usize, f64> = BTreeMap::new();
    let mut col_counts: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b.iter()) {
        *cells.entry((x, y)).or_insert(0.0) += 1.0;
        *row_counts.entry(x).or_insert(0.0) += 1.0;
        *col_counts.entry(y).or_insert(0.0) += 1.0;
    }
    let index: f64 = cells.values().map(|&v| comb2(v)).sum();
    let row_sum: f64 = row_counts.values().map(|&v| comb2(v)).sum();
    let col_sum: f64 = col_counts.values().map(|&v| comb2(v)).sum();
    let total = comb2(a.len() as f64);
    let expected = row_sum * col_sum / total;
    let max = 0.5 * (row_sum + col_sum);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Configuration for the dynamic clustering pipeline.
#[derive(Debug, Clone)]
pub struct DynamicConfig {
    pub generator: GeneratorSelect,
    /// Proximity bandwidth; `None` means the auto rule.
    pub epsilon: Option<f64>,
    /// Optional weight-support cutoff, in units of epsilon.
    pub cutoff: Option<f64>,
    /// KDE bandwidth; `None` means the 1-D default rule.
    pub delta: Option<f64>,
    /// Domain length for the default bandwidth rule; `None` falls back to
    /// the observed data range.
    pub domain_length: Option<f64>,
    pub preset: ConstantPreset,
    /// Embedding time.
    pub t: f64,
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Cluster in the diffusion metric by scaling embedding coordinate `j`
    /// by `d_alpha(j)^{-1/2}` before k-means (alpha taken from the generator
    /// selection, 1 when the family has no exponent).
    pub diffusion_metric: bool,
}

impl Default for DynamicConfig {
    fn default() -> Self {
        DynamicConfig {
            generator: GeneratorSelect::Beta(0.5),
            epsilon: None,
            cutoff: None,
            delta: None,
            domain_length: None,
            preset: ConstantPreset::Experiment,
            t: 10.0,
            k: 2,
            restarts: 10,
            seed: 0,
            diffusion_metric: false,
        }
    }
}

/// A clustering plus the provenance of the pipeline run that produced it.
#[derive(Debug, Clone)]
pub struct DynamicClustering {
    pub clustering: Clustering,
    pub kind: GeneratorKind,
    /// Generator parameters plus the resolved bandwidths and the time.
    pub params: BTreeMap<String, f64>,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub t: f64,
}

fn pipeline_rows(cloud: &PointCloud, cfg: &DynamicConfig) -> Result<(Array2<f64>, BuiltGenerator, f64)> {
    let graph = build_proximity_graph(cloud, cfg.epsilon, cfg.cutoff)?;
    let epsilon = graph.epsilon.expect("proximity graphs carry their bandwidth");
    let built = build_generator(
        cloud,
        &graph,
        cfg.generator,
        cfg.preset,
        cfg.delta,
        cfg.domain_length,
    )?;
    let emb = embed_all(&built.rate, cfg.t)?;
    let mut rows = emb.vectors;
    if cfg.diffusion_metric {
        let alpha = match cfg.generator {
            GeneratorSelect::RwAlpha(a) => a,
            _ => 1.0,
        };
        let d_alpha = graph.reweigh(alpha)?.degrees;
        for (j, mut col) in rows.columns_mut().into_iter().enumerate() {
            let scale = 1.0 / d_alpha[j].sqrt();
            col.mapv_inplace(|v| v * scale);
        }
    }
    Ok((rows, built, epsilon))
}

/// Run the full dynamic clustering pipeline: proximity graph, density
/// estimate where the generator family needs one, Markov embedding at time
/// `t`, then best-of-restarts k-means on the embedded rows.
pub fn cluster_dynamic(cloud: &PointCloud, cfg: &DynamicConfig) -> Result<DynamicClustering> {
    let (rows, built, epsilon) = pipeline_rows(cloud, cfg)?;
    let clustering = kmeans(&rows, cfg.k, cfg.restarts, cfg.seed)?;
    let mut params = built.rate.params.clone();
    params.insert("epsilon".into(), epsilon);
    params.insert("t".into(), cfg.t);
    if let Some(d) = built.delta {
        params.insert("delta".into(), d);
    }
    Ok(DynamicClustering {
        clustering,
        kind: built.rate.kind,
        params,
        epsilon,
        delta: built.delta,
        t: cfg.t,
    })
}

/// Energy profile of the pipeline's embedded rows over k = 1..=k_max.
pub fn energy_profile(
    cloud: &PointCloud,
    cfg: &DynamicConfig,
    k_max: usize,
) -> Result<Vec<EnergyPoint>> {
    let (rows, _, _) = pipeline_rows(cloud, cfg)?;
    energy_profile_rows(&rows, k_max, cfg.restarts, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_rows(n: usize, dim: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, dim), |_| rng.gen_range(-1.0..1.0))
    }

    /// Exhaustive minimum of the 2-cluster k-means energy over every
    /// two-block partition (centers at block means).
    fn best_two_cluster_energy(rows: &Array2<f64>) -> f64 {
        let n = rows.nrows();
        let dim = rows.ncols();
        assert!(n <= 20);
        let mut best = f64::INFINITY;
        for mask in 1..((1u32 << n) - 1) {
            let mut sums = [vec![0.0; dim], vec![0.0; dim]];
            let mut counts = [0.0f64, 0.0];
            for i in 0..n {
                let g = ((mask >> i) & 1) as usize;
                counts[g] += 1.0;
                for j in 0..dim {
                    sums[g][j] += rows[[i, j]];
                }
            }
            let mut total = 0.0;
            for i in 0..n {
                let g = ((mask >> i) & 1) as usize;
                for j in 0..dim {
                    let d = rows[[i, j]] - sums[g][j] / counts[g];
                    total += d * d;
                }
            }
            best = best.min(total / n as f64);
        }
        best
    }

    /// ARI from raw pair counting, independent of the contingency-table
    /// route.
    fn pair_count_ari(a: &[usize], b: &[usize]) -> f64 {
        let n = a.len();
        let (mut both, mut only_a, mut only_b, mut neither) = (0.0f64, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => both += 1.0,
                    (true, false) => only_a += 1.0,
                    (false, true) => only_b += 1.0,
                    (false, false) => neither += 1.0,
                }
            }
        }
        2.0 * (both * neither - only_a * only_b)
            / ((both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither))
    }

    fn grid_cloud(n: usize) -> PointCloud {
        let pts =
            Array2::from_shape_fn((n, 1), |(i, _)| -1.5 + 3.0 * i as f64 / (n - 1) as f64);
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn kmeans_with_k_equal_n_gives_zero_energy() {
        let rows = random_rows(6, 2, 3);
        let c = kmeans(&rows, 6, 3, 0).unwrap();
        assert_eq!(c.energy, 0.0);
        let mut sorted = c.labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn kmeans_two_far_groups_hand_energy() {
        let rows = array![[0.0], [0.1], [10.0], [10.1]];
        let c = kmeans(&rows, 2, 5, 1).unwrap();
        assert_eq!(c.labels[0], c.labels[1]);
        assert_eq!(c.labels[2], c.labels[3]);
        assert_ne!(c.labels[0], c.labels[2]);
        // each group has variance (0.05)^2 about its center
        assert!((c.energy - 0.0025).abs() < 1e-15);
        assert!((c.normalized_energy - 0.0025 / 25.0025).abs() < 1e-12);
    }

    #[test]
    fn kmeans_k1_center_is_the_row_mean() {
        let rows = random_rows(10, 3, 4);
        let c = kmeans(&rows, 1, 1, 0).unwrap();
        let mean = rows.mean_axis(Axis(0)).unwrap();
        for (a, b) in c.centers.row(0).iter().zip(mean.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((c.energy - total_variance(&rows)).abs() < 1e-14);
        assert!((c.normalized_energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_matches_exhaustive_two_cluster_oracle() {
        // orthonormal rows: every two-block split gives 1 - 2/n
        let eye: Array2<f64> = Array2::eye(8);
        let c = kmeans(&eye, 2, 10, 0).unwrap();
        assert!((c.energy - (1.0 - 2.0 / 8.0)).abs() < 1e-12);
        assert!((c.energy - best_two_cluster_energy(&eye)).abs() < 1e-12);
        // generic small clouds: restarts find the global optimum
        for seed in 0..4 {
            let rows = random_rows(7, 2, 100 + seed);
            let c = kmeans(&rows, 2, 20, seed).unwrap();
            let oracle = best_two_cluster_energy(&rows);
            assert!(
                (c.energy - oracle).abs() < 1e-10,
                "seed {seed}: {} vs {oracle}",
                c.energy
            );
        }
    }

    #[test]
    fn kmeans_handles_duplicate_points() {
        let rows = array![[0.0], [0.0], [0.0], [5.0], [5.0]];
        let c = kmeans(&rows, 3, 4, 0).unwrap();
        assert!(c.energy <= 1e-30);
        assert!(c.labels.iter().all(|&l| l < 3));
        assert_eq!(c.labels[0], c.labels[1]);
        assert_eq!(c.labels[1], c.labels[2]);
        assert_eq!(c.labels[3], c.labels[4]);
        assert_ne!(c.labels[0], c.labels[3]);
    }

    #[test]
    fn kmeans_rejects_bad_arguments() {
        let rows = random_rows(5, 2, 0);
        assert!(kmeans(&rows, 0, 3, 0).is_err());
        assert!(kmeans(&rows, 6, 3, 0).is_err());
        assert!(kmeans(&rows, 2, 0, 0).is_err());
        let mut bad = rows.clone();
        bad[[0, 0]] = f64::NAN;
        assert!(kmeans(&bad, 2, 3, 0).is_err());
    }

    #[test]
    fn kmeans_labels_invariant_under_coordinate_permutation() {
        let rows = random_rows(12, 4, 7);
        let perm = [2usize, 0, 3, 1];
        let permuted = Array2::from_shape_fn((12, 4), |(i, j)| rows[[i, perm[j]]]);
        let a = kmeans(&rows, 3, 6, 11).unwrap();
        let b = kmeans(&permuted, 3, 6, 11).unwrap();
        assert_eq!(a.labels, b.labels);
        assert!((a.energy - b.energy).abs() < 1e-12);
    }

    #[test]
    fn kmeans_is_deterministic_for_fixed_seed() {
        let rows = random_rows(30, 3, 5);
        let a = kmeans(&rows, 4, 8, 42).unwrap();
        let b = kmeans(&rows, 4, 8, 42).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.energy, b.energy);
        assert_eq!(a.centers, b.centers);
    }

    #[test]
    fn energy_profile_is_nonincreasing_and_anchored_at_total_variance() {
        let rows = random_rows(30, 3, 2);
        let prof = energy_profile_rows(&rows, 8, 4, 9).unwrap();
        assert_eq!(prof.len(), 8);
        assert_eq!(prof[0].k, 1);
        assert!((prof[0].energy - total_variance(&rows)).abs() < 1e-15);
        assert_eq!(prof[0].normalized, 1.0);
        for w in prof.windows(2) {
            assert_eq!(w[1].k, w[0].k + 1);
            assert!(
                w[1].energy <= w[0].energy + 1e-12 * (1.0 + w[0].energy),
                "k {}: {} -> {}",
                w[0].k,
                w[0].energy,
                w[1].energy
            );
        }
    }

    #[test]
    fn adjusted_rand_index_conventions() {
        let a = vec![0, 0, 1, 1, 2, 2];
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        let relabeled = vec![2, 2, 0, 0, 1, 1];
        assert_eq!(adjusted_rand_index(&a, &relabeled).unwrap(), 1.0);
        let constant = vec![0usize; 6];
        let arb = vec![0, 1, 2, 0, 1, 2];
        assert_eq!(adjusted_rand_index(&constant, &arb).unwrap(), 0.0);
        assert_eq!(adjusted_rand_index(&constant, &constant).unwrap(), 1.0);
        let singles: Vec<usize> = (0..6).collect();
        assert_eq!(adjusted_rand_index(&singles, &singles).unwrap(), 1.0);
        assert!(adjusted_rand_index(&a, &[0, 1]).is_err());
        assert!(adjusted_rand_index(&[], &[]).is_err());
    }

    #[test]
    fn adjusted_rand_index_six_point_oracle() {
        let a = [0, 0, 0, 1, 1, 1];
        let b = [0, 0, 1, 1, 1, 1];
        let ari = adjusted_rand_index(&a, &b).unwrap();
        assert!((ari - 12.0 / 37.0).abs() < 1e-15);
        assert!((ari - pair_count_ari(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn cluster_dynamic_pure_diffusion_splits_uniform_grid_in_even_halves() {
        let cloud = grid_cloud(60);
        let cfg = DynamicConfig {
            generator: GeneratorSelect::Beta(0.0),
            t: 10.0,
            k: 2,
            restarts: 5,
            ..DynamicConfig::default()
        };
        let out = cluster_dynamic(&cloud, &cfg).unwrap();
        let labels = &out.clustering.labels;
        let ones = labels.iter().filter(|&&l| l == 1).count();
        assert!((ones as i64 - 30).abs() <= 3, "cluster sizes {ones}/60");
        // points are in x order: the split is a single contiguous cut
        let flips = labels.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(flips, 1);
        assert_eq!(out.kind, GeneratorKind::BetaInterpolation);
        assert!(out.params.contains_key("epsilon"));
        assert!(out.delta.is_none());
    }

    #[test]
    fn energy_profile_of_uniform_diffusion_approaches_segment_ratios() {
        // uniform data quantizes like the interval: segment clustering
        // predicts E_2/E_1 = 1/4 and E_3/E_1 = 1/9 while the embedding still
        // resolves several modes (at much larger t the profile settles near
        // (0.19, 0.08) as only the slowest mode survives)
        let cloud = grid_cloud(90);
        let cfg = DynamicConfig {
            generator: GeneratorSelect::Beta(0.0),
            t: 0.7,
            restarts: 6,
            seed: 2,
            ..DynamicConfig::default()
        };
        let prof = energy_profile(&cloud, &cfg, 3).unwrap();
        assert!(
            (prof[1].normalized - 0.25).abs() <= 0.05,
            "E2norm {}",
            prof[1].normalized
        );
        assert!(
            (prof[2].normalized - 1.0 / 9.0).abs() <= 0.05,
            "E3norm {}",
            prof[2].normalized
        );
    }

    #[test]
    fn cluster_dynamic_at_time_zero_is_kmeans_on_the_identity() {
        let cloud = PointCloud::new(array![
            [-1.2],
            [-0.9],
            [-0.55],
            [-0.3],
            [0.2],
            [0.8],
            [1.0],
            [1.3]
        ])
        .unwrap();
        let cfg = DynamicConfig {
            generator: GeneratorSelect::Beta(0.5),
            delta: Some(0.4),
            t: 0.0,
            k: 2,
            restarts: 12,
            seed: 3,
            ..DynamicConfig::default()
        };
        let out = cluster_dynamic(&cloud, &cfg).unwrap();
        let expect = 1.0 - 2.0 / 8.0;
        assert!((out.clustering.energy - expect).abs() < 1e-6);
        let eye: Array2<f64> = Array2::eye(8);
        let oracle = best_two_cluster_energy(&eye);
        assert!((out.clustering.energy - oracle).abs() < 1e-6);
    }

    #[test]
    fn labels_survive_roundoff_scale_renormalization() {
        let xs = [
            -0.95, -0.88, -0.8, -0.74, -0.66, -0.6, -0.53, -0.45, 0.62, 0.7, 0.77, 0.85, 0.92,
            1.0, 1.08, 1.15,
        ];
        let cloud =
            PointCloud::new(Array2::from_shape_fn((16, 1), |(i, _)| xs[i])).unwrap();
        let graph = build_proximity_graph(&cloud, None, None).unwrap();
        let built = build_generator(
            &cloud,
            &graph,
            GeneratorSelect::Beta(0.9),
            ConstantPreset::Experiment,
            Some(0.3),
            None,
        )
        .unwrap();
        let emb = embed_all(&built.rate, 8.0).unwrap();
        let base = kmeans(&emb.vectors, 2, 8, 5).unwrap();
        // perturb at the 1e-9 scale, clip, renormalize each row to mass one
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut noisy = emb.vectors.clone();
        for mut row in noisy.rows_mut() {
            for v in row.iter_mut() {
                *v = (*v + rng.gen_range(-1e-9..1e-9)).max(0.0);
            }
            let mass = row.sum();
            row.mapv_inplace(|v| v / mass);
        }
        let shifted = kmeans(&noisy, 2, 8, 5).unwrap();
        assert_eq!(base.labels, shifted.labels);
    }

    #[test]
    fn diffusion_metric_option_matches_manual_column_scaling() {
        let cloud = grid_cloud(10);
        let cfg = DynamicConfig {
            generator: GeneratorSelect::RwAlpha(0.5),
            t: 2.0,
            k: 2,
            restarts: 4,
            seed: 1,
            diffusion_metric: true,
            ..DynamicConfig::default()
        };
        let out = cluster_dynamic(&cloud, &cfg).unwrap();
        let graph = build_proximity_graph(&cloud, None, None).unwrap();
        let built = build_generator(
            &cloud,
            &graph,
            GeneratorSelect::RwAlpha(0.5),
            ConstantPreset::Experiment,
            None,
            None,
        )
        .unwrap();
        let emb = embed_all(&built.rate, 2.0).unwrap();
        let d_alpha = graph.reweigh(0.5).unwrap().degrees;
        let mut rows = emb.vectors;
        for (j, mut col) in rows.columns_mut().into_iter().enumerate() {
            let scale = 1.0 / d_alpha[j].sqrt();
            col.mapv_inplace(|v| v * scale);
        }
        let manual = kmeans(&rows, 2, 4, 1).unwrap();
        assert_eq!(out.clustering.labels, manual.labels);
        assert!((out.clustering.energy - manual.energy).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn kmeans_output_contract(seed in 0u64..1000, n in 2usize..20, kk in 1usize..6) {
            let k = kk.min(n);
            let rows = random_rows(n, 2, seed);
            let c = kmeans(&rows, k, 3, seed).unwrap();
            prop_assert_eq!(c.labels.len(), n);
            prop_assert!(c.labels.iter().all(|&l| l < k));
            prop_assert!(c.energy.is_finite() && c.energy >= 0.0);
            prop_assert_eq!(c.centers.nrows(), k);
            prop_assert_eq!(adjusted_rand_index(&c.labels, &c.labels).unwrap(), 1.0);
        }
    }
}
