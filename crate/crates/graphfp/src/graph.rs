//! Point clouds, Gaussian proximity graphs, kernel density estimates, and
//! graph Laplacians.
//!
//! A weighted graph is stored densely: `weights[[i, j]]` is the symmetric
//! nonnegative edge weight between samples `i` and `j`, with a zero diagonal,
//! and `degrees[i]` is the row sum over the off-diagonal entries.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};

use crate::{Error, Result};

/// A finite set of sample points in `R^m`, one row per point, with optional
/// ground-truth component labels carried alongside for cluster scoring.
#[derive(Debug, Clone)]
pub struct PointCloud {
    pub points: Array2<f64>,
    pub labels: Option<Vec<usize>>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::InvalidInput(
                "point cloud must have at least one point and one coordinate".into(),
            ));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "point cloud contains a non-finite coordinate".into(),
            ));
        }
        Ok(Self {
            points,
            labels: None,
        })
    }

    pub fn with_labels(points: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != points.nrows() {
            return Err(Error::InvalidInput(format!(
                "label count {} does not match point count {}",
                labels.len(),
                points.nrows()
            )));
        }
        let mut cloud = Self::new(points)?;
        cloud.labels = Some(labels);
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }
}

/// Isotropic Gaussian edge-weight profile in `dim` dimensions evaluated at
/// pair distance `dist`: `exp(-dist^2 / (2 eps^2)) / (2 pi eps^2)^(dim/2)`.
pub fn gaussian_weight(dist: f64, epsilon: f64, dim: usize) -> f64 {
    let norm = (2.0 * PI * epsilon * epsilon).powf(dim as f64 / 2.0);
    (-dist * dist / (2.0 * epsilon * epsilon)).exp() / norm
}

/// Isotropic Gaussian density kernel in `dim` dimensions:
/// `(2 pi)^(-dim/2) delta^(-dim) exp(-|x|^2 / (2 delta^2))` at `|x| = dist`.
pub fn gaussian_kernel(dist: f64, delta: f64, dim: usize) -> f64 {
    let norm = (2.0 * PI).powf(dim as f64 / 2.0) * delta.powi(dim as i32);
    (-dist * dist / (2.0 * delta * delta)).exp() / norm
}

fn pair_distance(points: &Array2<f64>, i: usize, j: usize) -> f64 {
    let (ri, rj) = (points.row(i), points.row(j));
    ri.iter()
        .zip(rj.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Connection-scale heuristic: `sqrt(2)` times the largest nearest-neighbor
/// distance, so every point keeps at least one strong edge.
pub fn auto_bandwidth(points: &Array2<f64>) -> Result<f64> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InvalidInput(
            "bandwidth heuristic needs at least two points".into(),
        ));
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        let mut nearest = f64::INFINITY;
        for j in 0..n {
            if i != j {
                nearest = nearest.min(pair_distance(points, i, j));
            }
        }
        if nearest == 0.0 {
            return Err(Error::Degenerate(format!(
                "duplicate point at index {i}: bandwidth heuristic is zero"
            )));
        }
        worst = worst.max(nearest);
    }
    Ok(2.0_f64.sqrt() * worst)
}

/// Kernel density estimate of the sampling density at each query row:
/// `rho(x) = (1/n) sum_i kernel(|x - y_i|)` over sample rows `y_i`.
pub fn kde(samples: &Array2<f64>, queries: &Array2<f64>, delta: f64) -> Result<Array1<f64>> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "kde bandwidth must be positive and finite, got {delta}"
        )));
    }
    if samples.ncols() != queries.ncols() {
        return Err(Error::InvalidInput(format!(
            "kde query dimension {} does not match sample dimension {}",
            queries.ncols(),
            samples.ncols()
        )));
    }
    let n = samples.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("kde needs at least one sample".into()));
    }
    let dim = samples.ncols();
    let mut out = Array1::zeros(queries.nrows());
    for (q, row) in queries.rows().into_iter().enumerate() {
        let mut acc = 0.0;
        for s in samples.rows() {
            let dist = row
                .iter()
                .zip(s.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            acc += gaussian_kernel(dist, delta, dim);
        }
        out[q] = acc / n as f64;
    }
    Ok(out)
}

/// KDE evaluated at the samples themselves (the density estimate each sample
/// sees, including its own kernel mass).
pub fn kde_at_samples(samples: &Array2<f64>, delta: f64) -> Result<Array1<f64>> {
    kde(samples, samples, delta)
}

/// Default 1-D density bandwidth from the domain length and sample count:
/// `sqrt(2) * (length / n)^(1/2)`.
pub fn kde_default_bandwidth(domain_length: f64, n: usize) -> f64 {
    2.0_f64.sqrt() * (domain_length / n as f64).sqrt()
}

/// Resolve a bandwidth request: an explicit value is validated and returned;
/// `None` falls back to the 1-D default rule, taking the domain length from
/// `domain_length` or, failing that, from the observed range of the points.
/// There is no default rule in higher dimensions.
pub fn resolve_kde_bandwidth(
    cloud: &PointCloud,
    delta: Option<f64>,
    domain_length: Option<f64>,
) -> Result<f64> {
    if let Some(d) = delta {
        if !d.is_finite() || !(d > 0.0) {
            return Err(Error::InvalidInput(format!(
                "resolve_kde_bandwidth: bandwidth must be positive and finite, got {d}"
            )));
        }
        return Ok(d);
    }
    if cloud.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "resolve_kde_bandwidth: the default bandwidth rule is one-dimensional; \
             pass an explicit value for {}-dimensional data",
            cloud.dim()
        )));
    }
    let length = match domain_length {
        Some(l) if l.is_finite() && l > 0.0 => l,
        Some(l) => {
            return Err(Error::InvalidInput(format!(
                "resolve_kde_bandwidth: domain length must be positive and finite, got {l}"
            )))
        }
        None => {
            let xs = cloud.points.column(0);
            let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let range = max - min;
            if !(range > 0.0) {
                return Err(Error::Degenerate(
                    "resolve_kde_bandwidth: all points coincide; no range to infer a bandwidth"
                        .into(),
                ));
            }
            range
        }
    };
    Ok(kde_default_bandwidth(length, cloud.len()))
}

/// A symmetric weighted graph over a sample set, with cached degrees and the
/// construction metadata (bandwidth, ambient dimension) that downstream rate
/// normalizations need.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    pub weights: Array2<f64>,
    pub degrees: Array1<f64>,
    /// Bandwidth used to build the graph, when it came from a point cloud.
    pub epsilon: Option<f64>,
    /// Ambient dimension of the underlying samples, when known.
    pub dim: Option<usize>,
}

impl WeightedGraph {
    /// Validates and wraps a raw weight matrix: square, finite, nonnegative,
    /// symmetric, zero diagonal, no isolated vertex, and connected (the whole
    /// library assumes one component; the error lists the components found).
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n != weights.ncols() {
            return Err(Error::InvalidInput(format!(
                "weight matrix must be square, got {}x{}",
                n,
                weights.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput(
                "graph needs at least two vertices".into(),
            ));
        }
        for i in 0..n {
            if weights[[i, i]] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight matrix has nonzero diagonal at {i}"
                )));
            }
            for j in 0..n {
                let w = weights[[i, j]];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "weight ({i},{j}) = {w} is not finite and nonnegative"
                    )));
                }
                if (w - weights[[j, i]]).abs() > 1e-12 * w.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "weight matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let degrees: Array1<f64> = weights.sum_axis(ndarray::Axis(1));
        if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
            return Err(Error::Degenerate(format!(
                "vertex {i} has zero degree (isolated point)"
            )));
        }
        let graph = Self {
            weights,
            degrees,
            epsilon: None,
            dim: None,
        };
        graph.require_connected()?;
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    /// Vertex sets of the connected components (positive-weight edges),
    /// each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        connected_components(&self.weights)
    }

    /// Errors with the component decomposition when the graph is not
    /// connected.
    pub fn require_connected(&self) -> Result<()> {
        let comps = self.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected { components: comps });
        }
        Ok(())
    }

    /// Density-rescaled graph: `w_a(x, y) = w(x, y) / (d(x)^a d(y)^a)` with
    /// degrees recomputed for the new weights.
    pub fn reweigh(&self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "reweighing exponent must be finite, got {alpha}"
            )));
        }
        let n = self.len();
        let scale: Vec<f64> = self.degrees.iter().map(|d| d.powf(alpha)).collect();
        let mut weights = self.weights.clone();
        for i in 0..n {
            for j in 0..n {
                weights[[i, j]] /= scale[i] * scale[j];
            }
        }
        let degrees = weights.sum_axis(ndarray::Axis(1));
        if let Some(i) = degrees.iter().position(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::Numerical(format!(
                "reweighing with exponent {alpha} produced a bad degree at vertex {i}"
            )));
        }
        Ok(Self {
            weights,
            degrees,
            epsilon: self.epsilon,
            dim: self.dim,
        })
    }
}

/// Builds the Gaussian proximity graph of a point cloud.
///
/// `epsilon = None` uses [`auto_bandwidth`]. With `cutoff = Some(c)`, weights
/// at pair distance greater than `c * epsilon` are set to zero (which can
/// disconnect the graph); `None` keeps the full Gaussian profile, which is
/// strictly positive and therefore always connected.
pub fn build_proximity_graph(
    cloud: &PointCloud,
    epsilon: Option<f64>,
    cutoff: Option<f64>,
) -> Result<WeightedGraph> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "proximity graph needs at least two points".into(),
        ));
    }
    let eps = match epsilon {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => {
            return Err(Error::InvalidInput(format!(
                "bandwidth must be positive and finite, got {e}"
            )))
        }
        None => auto_bandwidth(&cloud.points)?,
    };
    if let Some(c) = cutoff {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "cutoff multiplier must be positive and finite, got {c}"
            )));
        }
    }
    let dim = cloud.dim();
    let mut weights = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = pair_distance(&cloud.points, i, j);
            let w = match cutoff {
                Some(c) if dist > c * eps => 0.0,
                _ => gaussian_weight(dist, eps, dim),
            };
            weights[[i, j]] = w;
            weights[[j, i]] = w;
        }
    }
    let mut graph = WeightedGraph::from_weights(weights)?;
    graph.epsilon = Some(eps);
    graph.dim = Some(dim);
    Ok(graph)
}

/// Which Laplacian of the graph to assemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaplacianKind {
    /// `D - W`.
    Unnormalized,
    /// Symmetric normalization `I - D^(-1/2) W D^(-1/2)`.
    Normalized,
    /// `I - D^(-1) W`.
    RandomWalk,
    /// Random-walk Laplacian of the graph reweighed with this exponent.
    RwAlpha(f64),
}

/// A graph Laplacian together with the kind that produced it.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    pub matrix: Array2<f64>,
    pub kind: LaplacianKind,
}

/// Assembles the requested Laplacian of `graph`.
pub fn laplacian(graph: &WeightedGraph, kind: LaplacianKind) -> Result<LaplacianMatrix> {
    let n = graph.len();
    let matrix = match kind {
        LaplacianKind::Unnormalized => {
            let mut m = -graph.weights.clone();
            for i in 0..n {
                m[[i, i]] = graph.degrees[i];
            }
            m
        }
        LaplacianKind::Normalized => {
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    let v = graph.weights[[i, j]]
                        / (graph.degrees[i].sqrt() * graph.degrees[j].sqrt());
                    m[[i, j]] = if i == j { 1.0 - v } else { -v };
                }
            }
            m
        }
        LaplacianKind::RandomWalk => {
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    let v = graph.weights[[i, j]] / graph.degrees[i];
                    m[[i, j]] = if i == j { 1.0 - v } else { -v };
                }
            }
            m
        }
        LaplacianKind::RwAlpha(alpha) => {
            let reweighed = graph.reweigh(alpha)?;
            return Ok(LaplacianMatrix {
                matrix: laplacian(&reweighed, LaplacianKind::RandomWalk)?.matrix,
                kind,
            });
        }
    };
    Ok(LaplacianMatrix { matrix, kind })
}

/// Connected components of the positive-weight adjacency structure; each
/// component is sorted and components are ordered by their smallest member.
pub fn connected_components(weights: &Array2<f64>) -> Vec<Vec<usize>> {
    let n = weights.nrows();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for u in 0..n {
                if !seen[u] && weights[[v, u]] > 0.0 {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}
