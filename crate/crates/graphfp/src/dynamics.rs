//! Markov-chain dynamics and embeddings: evolving distributions under a
//! generator, the Dirac-row embedding map, spectral bases of the reweighed
//! random-walk Laplacian, and the distances used for clustering.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis};

use crate::graph::{laplacian, LaplacianKind, WeightedGraph};
use crate::linalg;
use crate::rates::{rate_constant_alpha, ConstantPreset, GeneratorKind, RateMatrix};
use crate::{Error, Result};

/// How [`evolve`] applies the semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveMethod {
    /// Dense scaling-and-squaring matrix exponential.
    MatrixExp,
    /// Adaptive explicit Runge-Kutta integration of `u' = u Q`
    /// (relative tolerance 1e-8, absolute 1e-10).
    Integrate,
}

/// Negative entries above this magnitude are treated as genuine numerical
/// failure rather than round-off.
const NEG_ROUNDOFF: f64 = 1e-10;
/// Allowed drift of total mass under evolution.
const MASS_TOL: f64 = 1e-8;

fn clean_distribution(mut u: Array1<f64>, context: &str) -> Result<Array1<f64>> {
    for v in u.iter_mut() {
        if *v < 0.0 {
            if *v <= -NEG_ROUNDOFF {
                return Err(Error::Numerical(format!(
                    "{context}: entry {v} is more negative than round-off tolerance"
                )));
            }
            *v = 0.0;
        }
    }
    let mass = u.sum();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::Numerical(format!(
            "{context}: mass drifted to {mass}"
        )));
    }
    Ok(u / mass)
}

fn check_initial(u0: &Array1<f64>, n: usize) -> Result<()> {
    if u0.len() != n {
        return Err(Error::InvalidInput(format!(
            "evolve: initial vector length {} does not match generator size {n}",
            u0.len()
        )));
    }
    if u0.iter().any(|&v| v < -NEG_ROUNDOFF || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "evolve: initial vector must be nonnegative".into(),
        ));
    }
    let mass = u0.sum();
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidInput(format!(
            "evolve: initial vector has mass {mass}, expected 1"
        )));
    }
    Ok(())
}

/// Evolves a probability vector: `u_t = u_0 e^{tQ}` (row convention).
/// Negative round-off is clipped and the result renormalized.
pub fn evolve(
    q: &RateMatrix,
    u0: &Array1<f64>,
    t: f64,
    method: EvolveMethod,
) -> Result<Array1<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "evolve: time must be finite and nonnegative, got {t}"
        )));
    }
    check_initial(u0, q.len())?;
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let u_t = match method {
        EvolveMethod::MatrixExp => {
            let e = linalg::expm(&(&q.q * t))?;
            u0.dot(&e)
        }
        EvolveMethod::Integrate => {
            let qt = q.q.t().to_owned();
            linalg::dopri5(|u| qt.dot(u), u0, t, 1e-8, 1e-10)?
        }
    };
    clean_distribution(u_t, "evolve")
}

/// Whether an embedding holds Markov probability rows or spectral
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFlavor {
    Markov,
    Spectral,
}

/// Rows of points in embedding space, plus the provenance needed to
/// serialize and compare runs.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    /// One row per sample; `k = n` for Markov rows, `k <= n` for spectral.
    pub vectors: Array2<f64>,
    pub t: f64,
    pub flavor: EmbeddingFlavor,
    pub kind: Option<GeneratorKind>,
    pub params: BTreeMap<String, f64>,
}

impl EmbeddingSet {
    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    pub fn width(&self) -> usize {
        self.vectors.ncols()
    }
}

/// Embeds every node as the distribution evolved from its Dirac mass: the
/// returned rows are `e^{tQ}` itself, cleaned row by row.
pub fn embed_all(q: &RateMatrix, t: f64) -> Result<EmbeddingSet> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "embed_all: time must be finite and nonnegative, got {t}"
        )));
    }
    let n = q.len();
    let e = linalg::expm(&(&q.q * t))?;
    let mut vectors = Array2::zeros((n, n));
    for (i, row) in e.axis_iter(Axis(0)).enumerate() {
        let cleaned = clean_distribution(row.to_owned(), "embed_all")?;
        vectors.row_mut(i).assign(&cleaned);
    }
    Ok(EmbeddingSet {
        vectors,
        t,
        flavor: EmbeddingFlavor::Markov,
        kind: Some(q.kind),
        params: q.params.clone(),
    })
}

/// Eigen-decomposition of the reweighed random-walk Laplacian, solved
/// through its symmetric conjugate so the basis is exactly orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    /// Eigenvalues on the generator's time scale (`C_a` folded in),
    /// ascending; the first is 0 up to round-off.
    pub eigenvalues: Array1<f64>,
    /// Columns: orthonormal eigenvectors of the symmetric normalization
    /// `I - D_a^{-1/2} W_a D_a^{-1/2}`.
    pub phi_tilde: Array2<f64>,
    /// Degrees of the reweighed graph.
    pub d_alpha: Array1<f64>,
    pub c_alpha: f64,
    pub alpha: f64,
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.phi_tilde.nrows()
    }

    pub fn width(&self) -> usize {
        self.phi_tilde.ncols()
    }

    /// Basis vectors in degree-weighted form `phi = D_a^{1/2} phi~`
    /// (eigenvectors of the transposed random-walk Laplacian), orthonormal
    /// under the `D_a^{-1}`-weighted inner product.
    pub fn phi(&self) -> Array2<f64> {
        let mut out = self.phi_tilde.clone();
        for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let s = self.d_alpha[i].sqrt();
            row.mapv_inplace(|v| v * s);
        }
        out
    }
}

/// Computes the first `k` spectral pairs of the reweighed random-walk
/// Laplacian on `graph`, reported on the generator time scale.
pub fn spectral_basis(
    graph: &WeightedGraph,
    alpha: f64,
    k: usize,
    preset: ConstantPreset,
) -> Result<SpectralBasis> {
    let n = graph.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "spectral_basis: need 1 <= k <= {n}, got {k}"
        )));
    }
    if !(alpha <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "spectral_basis: exponent must be <= 1, got {alpha}"
        )));
    }
    let c = rate_constant_alpha(graph, alpha, preset)?;
    let reweighed = graph.reweigh(alpha)?;
    let lsym = laplacian(&reweighed, LaplacianKind::Normalized)?.matrix;
    // enforce exact symmetry before the eigensolver
    let lsym = (&lsym + &lsym.t()) * 0.5;
    let (vals, mut vecs) = linalg::sym_eig(&lsym);
    // deterministic sign: largest-magnitude entry of each column positive
    for mut col in vecs.axis_iter_mut(Axis(1)) {
        let mut lead = 0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[lead].abs() {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
    let eigenvalues = Array1::from_iter(vals.iter().take(k).map(|l| c * l));
    let phi_tilde = vecs.slice(ndarray::s![.., ..k]).to_owned();
    Ok(SpectralBasis {
        eigenvalues,
        phi_tilde,
        d_alpha: reweighed.degrees,
        c_alpha: c,
        alpha,
    })
}

/// Diffusion-map coordinates: row `i`, coordinate `l` is
/// `e^{-t lambda_l} phi~_l(x_i) / sqrt(d_a(x_i))`. With `k = n`, Euclidean
/// distances between rows equal diffusion distances between Markov rows.
pub fn spectral_embedding(basis: &SpectralBasis, t: f64, k: usize) -> Result<EmbeddingSet> {
    if k == 0 || k > basis.width() {
        return Err(Error::InvalidInput(format!(
            "spectral_embedding: need 1 <= k <= {}, got {k}",
            basis.width()
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "spectral_embedding: time must be finite and nonnegative, got {t}"
        )));
    }
    let n = basis.len();
    let decay: Vec<f64> = (0..k).map(|l| (-t * basis.eigenvalues[l]).exp()).collect();
    let vectors = Array2::from_shape_fn((n, k), |(i, l)| {
        decay[l] * basis.phi_tilde[[i, l]] / basis.d_alpha[i].sqrt()
    });
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), basis.alpha);
    params.insert("c_alpha".into(), basis.c_alpha);
    params.insert("k".into(), k as f64);
    Ok(EmbeddingSet {
        vectors,
        t,
        flavor: EmbeddingFlavor::Spectral,
        kind: Some(GeneratorKind::RwAlpha),
        params,
    })
}

/// Reconstructs the evolved Dirac row `evolve(Q^rw_a, delta_i, t)` from the
/// spectral basis:
/// `u_i(x) = sum_l e^{-t lambda_l} phi~_l(x_i) phi~_l(x) sqrt(d_a(x) / d_a(x_i))`.
pub fn spectral_reconstruct(basis: &SpectralBasis, t: f64, i: usize) -> Result<Array1<f64>> {
    let n = basis.len();
    if basis.width() != n {
        return Err(Error::InvalidInput(format!(
            "spectral_reconstruct: needs the full basis (k = {n}), got k = {}",
            basis.width()
        )));
    }
    if i >= n {
        return Err(Error::InvalidInput(format!(
            "spectral_reconstruct: node index {i} out of range for n = {n}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "spectral_reconstruct: time must be finite and nonnegative, got {t}"
        )));
    }
    let mut u = Array1::zeros(n);
    for l in 0..n {
        let coeff = (-t * basis.eigenvalues[l]).exp() * basis.phi_tilde[[i, l]];
        if coeff == 0.0 {
            continue;
        }
        for x in 0..n {
            u[x] += coeff * basis.phi_tilde[[x, l]];
        }
    }
    let di = basis.d_alpha[i].sqrt();
    for x in 0..n {
        u[x] *= (basis.d_alpha[x].sqrt()) / di;
    }
    Ok(u)
}

/// Euclidean distance between two embedding rows.
pub fn l2_distance(u: &Array1<f64>, v: &Array1<f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "l2_distance: lengths {} and {} differ",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter()
        .zip(v.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Degree-weighted distance between Markov rows:
/// `sqrt(sum_x (u(x) - v(x))^2 / d_a(x))`.
pub fn diffusion_distance(u: &Array1<f64>, v: &Array1<f64>, d_alpha: &Array1<f64>) -> Result<f64> {
    if u.len() != v.len() || u.len() != d_alpha.len() {
        return Err(Error::InvalidInput(
            "diffusion_distance: length mismatch".into(),
        ));
    }
    if d_alpha.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidInput(
            "diffusion_distance: weights must be positive".into(),
        ));
    }
    Ok(u.iter()
        .zip(v.iter())
        .zip(d_alpha.iter())
        .map(|((a, b), d)| (a - b) * (a - b) / d)
        .sum::<f64>()
        .sqrt())
}

/// The density view `u(x_i) d(x_i)`, the node-wise quantity comparable to a
/// continuum density.
pub fn density_view(u: &Array1<f64>, degrees: &Array1<f64>) -> Result<Array1<f64>> {
    if u.len() != degrees.len() {
        return Err(Error::InvalidInput(
            "density_view: length mismatch".into(),
        ));
    }
    Ok(u * degrees)
}
