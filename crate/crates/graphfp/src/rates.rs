//! Generator (rate-matrix) constructors.
//!
//! Every constructor returns a [`RateMatrix`]: nonnegative off-diagonal
//! entries with each diagonal entry closing its row to zero, the generator of
//! a continuous-time Markov chain in the row convention (`u_t = u_0 e^{tQ}`,
//! so `Q[[x, y]]` is the rate of mass flow from `x` to `y`).

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};

use crate::graph::{
    kde_at_samples, laplacian, resolve_kde_bandwidth, LaplacianKind, LaplacianMatrix, PointCloud,
    WeightedGraph,
};
use crate::{Error, Result};

/// Which construction produced a rate matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// `-c (D - W)`: diffusion generated by the negated unnormalized
    /// Laplacian.
    NegativeUnnormalized,
    /// `-C_a L^rw_a`: random-walk diffusion on the density-reweighed graph.
    RwAlpha,
    /// Upwind drift toward higher kernel density (potential `-1/rho`).
    MeanShift,
    /// Upwind drift along an arbitrary potential.
    Potential,
    /// Convex mix `beta * Q^ms + (1 - beta) * Q^rw_1`.
    BetaInterpolation,
    /// Steepest-uphill hill climbing over neighbor sets.
    Knf,
    /// Nearest-uphill hill climbing under a pairwise distance.
    Quickshift,
    /// Limit of `RwAlpha` as the exponent goes to negative infinity.
    RwLimit,
}

impl GeneratorKind {
    /// Stable tag used in JSON artifacts.
    pub fn tag(&self) -> &'static str {
        match self {
            GeneratorKind::NegativeUnnormalized => "unnormalized-laplacian-negated",
            GeneratorKind::RwAlpha => "rw-alpha",
            GeneratorKind::MeanShift => "mean-shift",
            GeneratorKind::Potential => "potential",
            GeneratorKind::BetaInterpolation => "beta-interpolation",
            GeneratorKind::Knf => "knf",
            GeneratorKind::Quickshift => "quickshift",
            GeneratorKind::RwLimit => "rw-limit",
        }
    }
}

/// A continuous-time Markov chain generator plus its provenance.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    pub q: Array2<f64>,
    pub kind: GeneratorKind,
    /// Named scalar parameters used in the construction (alpha, beta, the
    /// constants, ...), in deterministic order for serialization.
    pub params: BTreeMap<String, f64>,
}

impl RateMatrix {
    pub fn len(&self) -> usize {
        self.q.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.q.nrows() == 0
    }

    /// Checks the generator contract: off-diagonal entries nonnegative and
    /// row sums within `tol` of zero.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let v = self.q[[i, j]];
                if i != j && v < 0.0 {
                    return Err(Error::Numerical(format!(
                        "negative off-diagonal rate at ({i},{j}): {v}"
                    )));
                }
                sum += v;
            }
            if sum.abs() > tol {
                return Err(Error::Numerical(format!(
                    "row {i} sums to {sum}, outside tolerance {tol}"
                )));
            }
        }
        Ok(())
    }
}

fn params_from(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

/// Calibration of the time-scale constants `C_a` (diffusion) and `C_ms`
/// (mean shift).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantPreset {
    /// Default experiment calibration: `C_a = 1/((3 - 2a) eps^2)`,
    /// `C_ms = 1/(eps^2 n)`. Config tag: `section5`.
    Experiment,
    /// Kernel-moment calibration for the unit Gaussian profile (second
    /// moment `m`, mean-shift moment `1/2`): `C_a = 1/(m eps^2)`,
    /// `C_ms = 2/(n eps^2)`. Config tag: `section4`.
    KernelMoment,
    /// `C = 1` (raw generator scale). Config tag: `unit`.
    Unit,
    /// Explicit positive constant.
    Fixed(f64),
}

impl ConstantPreset {
    /// Parses a config token: a preset tag or a positive number.
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "section5" => Ok(ConstantPreset::Experiment),
            "section4" => Ok(ConstantPreset::KernelMoment),
            "unit" => Ok(ConstantPreset::Unit),
            other => match other.parse::<f64>() {
                Ok(c) if c > 0.0 && c.is_finite() => Ok(ConstantPreset::Fixed(c)),
                _ => Err(Error::InvalidInput(format!(
                    "unknown constant preset {other:?} (expected section4, section5, unit, or a positive number)"
                ))),
            },
        }
    }

    /// The config token for this preset.
    pub fn token(&self) -> String {
        match self {
            ConstantPreset::Experiment => "section5".into(),
            ConstantPreset::KernelMoment => "section4".into(),
            ConstantPreset::Unit => "unit".into(),
            ConstantPreset::Fixed(c) => format!("{c}"),
        }
    }
}

fn graph_scale(graph: &WeightedGraph, what: &str) -> Result<(f64, usize)> {
    match (graph.epsilon, graph.dim) {
        (Some(e), Some(m)) => Ok((e, m)),
        _ => Err(Error::InvalidInput(format!(
            "{what}: this preset needs bandwidth/dimension metadata; build the graph from a point cloud or use an explicit constant"
        ))),
    }
}

/// The diffusion constant `C_a` for a graph under a preset.
pub fn rate_constant_alpha(
    graph: &WeightedGraph,
    alpha: f64,
    preset: ConstantPreset,
) -> Result<f64> {
    match preset {
        ConstantPreset::Experiment => {
            let (eps, _) = graph_scale(graph, "rate_constant_alpha")?;
            Ok(1.0 / ((3.0 - 2.0 * alpha) * eps * eps))
        }
        ConstantPreset::KernelMoment => {
            let (eps, m) = graph_scale(graph, "rate_constant_alpha")?;
            Ok(1.0 / (m as f64 * eps * eps))
        }
        ConstantPreset::Unit => Ok(1.0),
        ConstantPreset::Fixed(c) if c > 0.0 && c.is_finite() => Ok(c),
        ConstantPreset::Fixed(c) => Err(Error::InvalidInput(format!(
            "rate constant must be positive and finite, got {c}"
        ))),
    }
}

/// The mean-shift constant `C_ms` for a graph under a preset.
pub fn rate_constant_mean_shift(graph: &WeightedGraph, preset: ConstantPreset) -> Result<f64> {
    let n = graph.len() as f64;
    match preset {
        ConstantPreset::Experiment => {
            let (eps, _) = graph_scale(graph, "rate_constant_mean_shift")?;
            Ok(1.0 / (eps * eps * n))
        }
        ConstantPreset::KernelMoment => {
            let (eps, _) = graph_scale(graph, "rate_constant_mean_shift")?;
            Ok(2.0 / (n * eps * eps))
        }
        ConstantPreset::Unit => Ok(1.0),
        ConstantPreset::Fixed(c) if c > 0.0 && c.is_finite() => Ok(c),
        ConstantPreset::Fixed(c) => Err(Error::InvalidInput(format!(
            "rate constant must be positive and finite, got {c}"
        ))),
    }
}

/// Thin named wrapper: the unnormalized Laplacian `D - W` of a graph.
pub fn unnormalized_laplacian(graph: &WeightedGraph) -> Result<LaplacianMatrix> {
    laplacian(graph, LaplacianKind::Unnormalized)
}

/// Thin named wrapper: the symmetric normalization `I - D^(-1/2) W D^(-1/2)`.
pub fn normalized_laplacian(graph: &WeightedGraph) -> Result<LaplacianMatrix> {
    laplacian(graph, LaplacianKind::Normalized)
}

/// Diffusion generator `-c (D - W)` from the unnormalized Laplacian.
pub fn q_neg_unnormalized_laplacian(graph: &WeightedGraph, c: f64) -> Result<RateMatrix> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidInput(format!(
            "q_neg_unnormalized_laplacian: constant must be positive, got {c}"
        )));
    }
    let n = graph.len();
    let mut q = &graph.weights * c;
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| q[[i, j]]).sum();
        q[[i, i]] = -off;
    }
    Ok(RateMatrix {
        q,
        kind: GeneratorKind::NegativeUnnormalized,
        params: params_from(&[("c", c)]),
    })
}

/// Weighted-diffusion generator `Q^rw_a = -C_a L^rw_a` on the reweighed
/// graph, computed in a ratio form that stays finite for very negative
/// exponents: off-diagonal `C_a * w_a(x,y) / sum_z w_a(x,z)`, diagonal
/// `-C_a`.
pub fn q_rw_alpha(graph: &WeightedGraph, alpha: f64, preset: ConstantPreset) -> Result<RateMatrix> {
    if !(alpha <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "q_rw_alpha: exponent must be <= 1, got {alpha}"
        )));
    }
    let c = rate_constant_alpha(graph, alpha, preset)?;
    let n = graph.len();
    // In the row-normalized ratio, the d(x)^(-alpha) factor cancels, leaving
    // p(x,y) = w(x,y) d(y)^(-alpha) / sum_z w(x,z) d(z)^(-alpha). Factoring
    // out the largest d^(-alpha) over the row's neighbors keeps every factor
    // in (0, 1], so the ratio is computable even at alpha = -50 where the
    // raw reweighed weights over- or underflow.
    let t = -alpha;
    let log_deg: Vec<f64> = graph.degrees.iter().map(|d| d.ln()).collect();
    let mut q = Array2::zeros((n, n));
    for x in 0..n {
        let mut ref_log = f64::NEG_INFINITY;
        for z in 0..n {
            if graph.weights[[x, z]] > 0.0 {
                ref_log = ref_log.max(t * log_deg[z]);
            }
        }
        let mut denom = 0.0;
        let mut factors = vec![0.0; n];
        for z in 0..n {
            let w = graph.weights[[x, z]];
            if w > 0.0 {
                factors[z] = (t * log_deg[z] - ref_log).exp();
                denom += w * factors[z];
            }
        }
        let mut off = 0.0;
        for y in 0..n {
            if y != x {
                let v = c * graph.weights[[x, y]] * factors[y] / denom;
                q[[x, y]] = v;
                off += v;
            }
        }
        q[[x, x]] = -off;
    }
    Ok(RateMatrix {
        q,
        kind: GeneratorKind::RwAlpha,
        params: params_from(&[("alpha", alpha), ("c_alpha", c)]),
    })
}

/// Upwind transport along a potential: off-diagonal
/// `c * (b(y) - b(x))_+ * w(x, y)`, diagonal closing the row.
pub fn q_potential(graph: &WeightedGraph, b: &Array1<f64>, c: f64) -> Result<RateMatrix> {
    let n = graph.len();
    if b.len() != n {
        return Err(Error::InvalidInput(format!(
            "q_potential: potential length {} does not match graph size {n}",
            b.len()
        )));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidInput(format!(
            "q_potential: constant must be positive, got {c}"
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "q_potential: potential has a non-finite entry".into(),
        ));
    }
    let mut q = Array2::zeros((n, n));
    for x in 0..n {
        let mut off = 0.0;
        for y in 0..n {
            if y != x {
                let v = c * (b[y] - b[x]).max(0.0) * graph.weights[[x, y]];
                q[[x, y]] = v;
                off += v;
            }
        }
        q[[x, x]] = -off;
    }
    Ok(RateMatrix {
        q,
        kind: GeneratorKind::Potential,
        params: params_from(&[("c", c)]),
    })
}

/// Graph mean shift: upwind transport toward higher kernel density, the
/// potential construction with `b = -1/rho`.
pub fn q_mean_shift(
    graph: &WeightedGraph,
    rho: &Array1<f64>,
    preset: ConstantPreset,
) -> Result<RateMatrix> {
    if rho.len() != graph.len() {
        return Err(Error::InvalidInput(format!(
            "q_mean_shift: density length {} does not match graph size {}",
            rho.len(),
            graph.len()
        )));
    }
    if rho.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidInput(
            "q_mean_shift: density must be strictly positive".into(),
        ));
    }
    let c = rate_constant_mean_shift(graph, preset)?;
    let b = rho.mapv(|r| -1.0 / r);
    let mut rate = q_potential(graph, &b, c)?;
    rate.kind = GeneratorKind::MeanShift;
    rate.params = params_from(&[("c_ms", c)]);
    Ok(rate)
}

/// Drift-diffusion interpolation `Q_beta = beta Q^ms + (1 - beta) Q^rw_1`.
pub fn q_beta(
    graph: &WeightedGraph,
    rho: &Array1<f64>,
    beta: f64,
    preset: ConstantPreset,
) -> Result<RateMatrix> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidInput(format!(
            "q_beta: interpolation weight must lie in [0, 1], got {beta}"
        )));
    }
    let ms = q_mean_shift(graph, rho, preset)?;
    let rw = q_rw_alpha(graph, 1.0, preset)?;
    let q = &ms.q * beta + &rw.q * (1.0 - beta);
    let mut params = params_from(&[("beta", beta)]);
    params.insert("c_ms".into(), ms.params["c_ms"]);
    params.insert("c_alpha".into(), rw.params["c_alpha"]);
    Ok(RateMatrix {
        q,
        kind: GeneratorKind::BetaInterpolation,
        params,
    })
}

/// Shared hill-climbing core: rate `1/#M` to each maximizer of `objective`
/// over `y != x`, absorbing (all-zero) row where the maximal objective is 0.
/// Ties are detected by exact equality.
fn hill_climb_rows<F>(n: usize, objective: F, kind: GeneratorKind, params: BTreeMap<String, f64>) -> RateMatrix
where
    F: Fn(usize, usize) -> f64,
{
    let mut q = Array2::zeros((n, n));
    for x in 0..n {
        let mut best = 0.0_f64;
        for y in 0..n {
            if y != x {
                best = best.max(objective(x, y));
            }
        }
        if best > 0.0 {
            let maximizers: Vec<usize> = (0..n)
                .filter(|&y| y != x && objective(x, y) == best)
                .collect();
            let rate = 1.0 / maximizers.len() as f64;
            for y in maximizers {
                q[[x, y]] = rate;
            }
            q[[x, x]] = -1.0;
        }
    }
    RateMatrix { q, kind, params }
}

/// Steepest-uphill hill climbing: maximizers of
/// `(b_hat(y) - b_hat(x))_+ / d_hat(x,y)` over `y` with `d_hat(x,y) < r`.
/// With `d_hat = None`, the pairwise "distance" is 1 between graph neighbors
/// and infinite otherwise.
pub fn q_knf(
    graph: &WeightedGraph,
    b_hat: &Array1<f64>,
    d_hat: Option<&Array2<f64>>,
    r: f64,
) -> Result<RateMatrix> {
    let n = graph.len();
    if b_hat.len() != n {
        return Err(Error::InvalidInput(format!(
            "q_knf: objective length {} does not match graph size {n}",
            b_hat.len()
        )));
    }
    if !(r > 1.0) {
        return Err(Error::InvalidInput(format!(
            "q_knf: radius must be > 1, got {r}"
        )));
    }
    if let Some(d) = d_hat {
        if d.dim() != (n, n) {
            return Err(Error::InvalidInput(
                "q_knf: distance matrix shape mismatch".into(),
            ));
        }
        if d.iter().any(|&v| v < 0.0 || v.is_nan()) {
            return Err(Error::InvalidInput(
                "q_knf: distances must be nonnegative".into(),
            ));
        }
    }
    let dist = |x: usize, y: usize| -> f64 {
        match d_hat {
            Some(d) => d[[x, y]],
            None => {
                if graph.weights[[x, y]] > 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
        }
    };
    let objective = |x: usize, y: usize| -> f64 {
        let d = dist(x, y);
        if d < r {
            (b_hat[y] - b_hat[x]).max(0.0) / d
        } else {
            0.0
        }
    };
    Ok(hill_climb_rows(
        n,
        objective,
        GeneratorKind::Knf,
        params_from(&[("r", r)]),
    ))
}

/// Nearest-uphill hill climbing: maximizers of `1/d_hat(x,y)` over strictly
/// uphill `y` (`b_hat(y) > b_hat(x)`).
pub fn q_quickshift(
    graph: &WeightedGraph,
    b_hat: &Array1<f64>,
    d_hat: &Array2<f64>,
) -> Result<RateMatrix> {
    let n = graph.len();
    if b_hat.len() != n {
        return Err(Error::InvalidInput(format!(
            "q_quickshift: objective length {} does not match graph size {n}",
            b_hat.len()
        )));
    }
    if d_hat.dim() != (n, n) {
        return Err(Error::InvalidInput(
            "q_quickshift: distance matrix shape mismatch".into(),
        ));
    }
    if d_hat.iter().any(|&v| v < 0.0 || v.is_nan()) {
        return Err(Error::InvalidInput(
            "q_quickshift: distances must be nonnegative".into(),
        ));
    }
    let objective = |x: usize, y: usize| -> f64 {
        if b_hat[y] > b_hat[x] {
            1.0 / d_hat[[x, y]]
        } else {
            0.0
        }
    };
    Ok(hill_climb_rows(
        n,
        objective,
        GeneratorKind::Quickshift,
        BTreeMap::new(),
    ))
}

/// The limit of [`q_rw_alpha`] as the exponent goes to negative infinity:
/// each row routes all its rate to the neighbors of maximal degree,
/// proportionally to the edge weights; diagonal -1.
pub fn q_rw_limit(graph: &WeightedGraph) -> Result<RateMatrix> {
    let n = graph.len();
    let mut q = Array2::zeros((n, n));
    for x in 0..n {
        let mut best = f64::NEG_INFINITY;
        for z in 0..n {
            if graph.weights[[x, z]] > 0.0 {
                best = best.max(graph.degrees[z]);
            }
        }
        let argmax: Vec<usize> = (0..n)
            .filter(|&z| graph.weights[[x, z]] > 0.0 && graph.degrees[z] == best)
            .collect();
        let total: f64 = argmax.iter().map(|&z| graph.weights[[x, z]]).sum();
        let mut off = 0.0;
        for &y in &argmax {
            let v = graph.weights[[x, y]] / total;
            q[[x, y]] = v;
            off += v;
        }
        q[[x, x]] = -off;
    }
    Ok(RateMatrix {
        q,
        kind: GeneratorKind::RwLimit,
        params: BTreeMap::new(),
    })
}

/// The drift weight equivalent to a reweighing exponent after the time
/// change: `beta = (2 - 2 alpha) / (3 - 2 alpha)`.
pub fn beta_from_alpha(alpha: f64) -> Result<f64> {
    if !(alpha <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "beta_from_alpha: exponent must be <= 1, got {alpha}"
        )));
    }
    Ok((2.0 - 2.0 * alpha) / (3.0 - 2.0 * alpha))
}

/// Config-level choice of generator family, as exposed by the CLI and the
/// experiment runner. Tokens: `q_beta`, `q_rw_alpha`, `q_knf`, `q_quickshift`,
/// `q_rw_limit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSelect {
    /// Drift-diffusion interpolation at the given weight in `[0, 1]`.
    Beta(f64),
    /// Reweighed random-walk generator at the given exponent `alpha <= 1`.
    RwAlpha(f64),
    /// Hill climbing on the density estimate with cutoff radius `r > 1`.
    Knf { r: f64 },
    /// Nearest-uphill hill climbing on the density estimate.
    Quickshift,
    /// Deep-exponent limit of the reweighed random walk.
    RwLimit,
}

impl GeneratorSelect {
    /// Build a selection from config fields. `q_beta` requires `beta`,
    /// `q_rw_alpha` requires `alpha`; `q_knf` takes an optional radius
    /// (default 2).
    pub fn from_config(
        kind: &str,
        alpha: Option<f64>,
        beta: Option<f64>,
        radius: Option<f64>,
    ) -> Result<Self> {
        match kind {
            "q_beta" => beta.map(GeneratorSelect::Beta).ok_or_else(|| {
                Error::InvalidInput("generator q_beta requires a beta value".into())
            }),
            "q_rw_alpha" => alpha.map(GeneratorSelect::RwAlpha).ok_or_else(|| {
                Error::InvalidInput("generator q_rw_alpha requires an alpha value".into())
            }),
            "q_knf" => Ok(GeneratorSelect::Knf {
                r: radius.unwrap_or(2.0),
            }),
            "q_quickshift" => Ok(GeneratorSelect::Quickshift),
            "q_rw_limit" => Ok(GeneratorSelect::RwLimit),
            other => Err(Error::InvalidInput(format!(
                "unknown generator kind {other:?}; expected one of \
                 q_beta, q_rw_alpha, q_knf, q_quickshift, q_rw_limit"
            ))),
        }
    }

    /// Config token for this selection.
    pub fn token(&self) -> &'static str {
        match self {
            GeneratorSelect::Beta(_) => "q_beta",
            GeneratorSelect::RwAlpha(_) => "q_rw_alpha",
            GeneratorSelect::Knf { .. } => "q_knf",
            GeneratorSelect::Quickshift => "q_quickshift",
            GeneratorSelect::RwLimit => "q_rw_limit",
        }
    }

    /// Whether building this generator needs a density estimate. The
    /// interpolation at weight 0 is pure diffusion and skips the estimate.
    pub fn needs_density(&self) -> bool {
        match self {
            GeneratorSelect::Beta(beta) => *beta > 0.0,
            GeneratorSelect::Knf { .. } | GeneratorSelect::Quickshift => true,
            GeneratorSelect::RwAlpha(_) | GeneratorSelect::RwLimit => false,
        }
    }
}

/// A generator assembled from a point cloud plus the ingredients that went
/// into it, kept for provenance.
#[derive(Debug, Clone)]
pub struct BuiltGenerator {
    pub rate: RateMatrix,
    /// KDE bandwidth actually used, when a density estimate was needed.
    pub delta: Option<f64>,
    /// Density estimate at the samples, when one was needed.
    pub rho: Option<Array1<f64>>,
}

/// Assemble the selected generator over `graph`, running the KDE step when
/// the family needs a density estimate. `delta = None` falls back to the 1-D
/// default bandwidth rule (using `domain_length` or the observed data range).
pub fn build_generator(
    cloud: &PointCloud,
    graph: &WeightedGraph,
    select: GeneratorSelect,
    preset: ConstantPreset,
    delta: Option<f64>,
    domain_length: Option<f64>,
) -> Result<BuiltGenerator> {
    if cloud.len() != graph.len() {
        return Err(Error::InvalidInput(format!(
            "build_generator: {} points vs {} graph nodes",
            cloud.len(),
            graph.len()
        )));
    }
    let (delta_used, rho) = if select.needs_density() {
        let d = resolve_kde_bandwidth(cloud, delta, domain_length)?;
        (Some(d), Some(kde_at_samples(&cloud.points, d)?))
    } else {
        (None, None)
    };
    let rate = match select {
        GeneratorSelect::Beta(beta) => {
            // at beta = 0 the drift term has weight zero; a constant stand-in
            // density keeps the call well-formed without a KDE pass
            let ones = Array1::ones(graph.len());
            let r = rho.as_ref().unwrap_or(&ones);
            q_beta(graph, r, beta, preset)?
        }
        GeneratorSelect::RwAlpha(alpha) => q_rw_alpha(graph, alpha, preset)?,
        GeneratorSelect::Knf { r } => q_knf(graph, rho.as_ref().expect("density built"), None, r)?,
        GeneratorSelect::Quickshift => {
            let d_hat = pairwise_distances(&cloud.points);
            q_quickshift(graph, rho.as_ref().expect("density built"), &d_hat)?
        }
        GeneratorSelect::RwLimit => q_rw_limit(graph)?,
    };
    Ok(BuiltGenerator {
        rate,
        delta: delta_used,
        rho,
    })
}

/// Euclidean distance matrix between rows of `points`.
pub fn pairwise_distances(points: &Array2<f64>) -> Array2<f64> {
    let n = points.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = points
                .row(i)
                .iter()
                .zip(points.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d[[i, j]] = dist;
            d[[j, i]] = dist;
        }
    }
    d
}
