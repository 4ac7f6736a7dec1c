//! Reference 1-D continuum solvers: an upwind finite-volume Fokker-Planck
//! generator with no-flux boundaries, Maxwellian steady states, and the
//! symmetrized (Witten) eigenanalysis with its 2-D Kronecker-sum check.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::graph::{gaussian_kernel, kde, PointCloud};
use crate::linalg::{dopri5, sym_eig};
use crate::{Error, Result};

/// Uniform cell-centered grid on `[a, b]`: `m` cells of width
/// `h = (b - a) / m` with nodes at the cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub h: f64,
    pub centers: Array1<f64>,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInput(format!(
                "grid: endpoints must be finite with a < b, got [{a}, {b}]"
            )));
        }
        if m < 3 {
            return Err(Error::InvalidInput(format!(
                "grid: need at least 3 cells, got {m}"
            )));
        }
        let h = (b - a) / m as f64;
        let centers = Array1::from_iter((0..m).map(|j| a + (j as f64 + 0.5) * h));
        Ok(Grid1D { a, b, m, h, centers })
    }
}

/// Scalar field sampled at the cell centers of a [`Grid1D`]; integrals are
/// the cell sums `sum(values) * h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: Grid1D,
    pub values: Array1<f64>,
}

impl DensityField {
    pub fn new(grid: Grid1D, values: Array1<f64>) -> Result<Self> {
        if values.len() != grid.m {
            return Err(Error::InvalidInput(format!(
                "field: {} values on a grid of {} cells",
                values.len(),
                grid.m
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "field: values must be finite and nonnegative".into(),
            ));
        }
        Ok(DensityField { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.centers.mapv(&f);
        DensityField::new(grid, values)
    }

    /// Unit point mass placed in the cell nearest to `x`.
    pub fn dirac(grid: Grid1D, x: f64) -> Result<Self> {
        if !(x >= grid.a && x <= grid.b) {
            return Err(Error::InvalidInput(format!(
                "dirac: {x} lies outside [{}, {}]",
                grid.a, grid.b
            )));
        }
        let j = (((x - grid.a) / grid.h) as usize).min(grid.m - 1);
        let mut values = Array1::zeros(grid.m);
        values[j] = 1.0 / grid.h;
        DensityField::new(grid, values)
    }

    pub fn mass(&self) -> f64 {
        self.values.sum() * self.grid.h
    }

    /// Rescale to unit mass.
    pub fn normalized(mut self) -> Result<Self> {
        let mass = self.mass();
        if !(mass > 0.0) {
            return Err(Error::Degenerate("field: zero mass".into()));
        }
        self.values /= mass;
        Ok(self)
    }

    pub fn l1_distance(&self, other: &DensityField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput(
                "l1_distance: fields live on different grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.h)
    }
}

/// Off-diagonal bands of the generator: `lower[j]` is the rate j -> j+1
/// (entry (j+1, j)) and `upper[j]` the rate j+1 -> j (entry (j, j+1)).
struct Tridiag {
    lower: Array1<f64>,
    diag: Array1<f64>,
    upper: Array1<f64>,
}

impl Tridiag {
    fn apply(&self, f: &Array1<f64>) -> Array1<f64> {
        let m = self.diag.len();
        let mut out = Array1::zeros(m);
        for j in 0..m {
            let mut v = self.diag[j] * f[j];
            if j >= 1 {
                v += self.lower[j - 1] * f[j - 1];
            }
            if j + 1 < m {
                v += self.upper[j] * f[j + 1];
            }
            out[j] = v;
        }
        out
    }

    fn dense(&self) -> Array2<f64> {
        let m = self.diag.len();
        let mut g = Array2::zeros((m, m));
        for j in 0..m {
            g[[j, j]] = self.diag[j];
            if j + 1 < m {
                g[[j + 1, j]] = self.lower[j];
                g[[j, j + 1]] = self.upper[j];
            }
        }
        g
    }
}

fn validate_beta(beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidInput(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    Ok(())
}

fn positive_log_values(rho: &DensityField) -> Result<Array1<f64>> {
    if rho.values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput(
            "density must be strictly positive on the grid".into(),
        ));
    }
    Ok(rho.values.mapv(f64::ln))
}

/// Finite-volume Fokker-Planck stencil for `f' = (1-beta) f'' - beta
/// (f (log rho)')'` with no-flux boundaries. The drift velocity at each
/// interface is chosen so that the discrete steady state is exactly the
/// grid Maxwellian `rho^{beta/(1-beta)}`: with `pi = rho^{beta/(1-beta)}`,
/// `v = (1-beta) (pi_{j+1} - pi_j) / (h min(pi_j, pi_{j+1}))`, which is
/// first-order consistent with `beta (log rho)'` and puts the scheme in
/// detailed balance with respect to `pi`. At `beta = 1` (no Maxwellian)
/// the velocity falls back to the plain log-density difference.
fn fp_tridiag(rho: &DensityField, beta: f64) -> Result<Tridiag> {
    validate_beta(beta)?;
    let ln_rho = positive_log_values(rho)?;
    let m = rho.grid.m;
    let h = rho.grid.h;
    let diff = (1.0 - beta) / (h * h);
    let s = if beta < 1.0 { beta / (1.0 - beta) } else { 0.0 };
    let mut lower = Array1::zeros(m - 1);
    let mut upper = Array1::zeros(m - 1);
    for j in 0..m - 1 {
        let dln = ln_rho[j + 1] - ln_rho[j];
        let v = if beta == 1.0 {
            dln / h
        } else {
            let delta = s * dln;
            (1.0 - beta) / h * delta.signum() * delta.abs().exp_m1()
        };
        let rate = v / h;
        lower[j] = diff + rate.max(0.0);
        upper[j] = diff + (-rate).max(0.0);
    }
    // Snap the rates to a shared power-of-two quantum (~2^-40 relative,
    // far below the O(h) scheme error): every column entry becomes an
    // exact multiple, so column sums cancel to exactly zero in any order.
    let top = lower
        .iter()
        .chain(upper.iter())
        .fold(0.0_f64, |acc, &v| acc.max(v));
    if top > 0.0 {
        let quantum = 2.0_f64.powi(top.log2().ceil() as i32 - 40);
        let snap = |v: f64| (v / quantum).round() * quantum;
        lower.mapv_inplace(snap);
        upper.mapv_inplace(snap);
    }
    let mut diag = Array1::zeros(m);
    for j in 0..m {
        let up = if j >= 1 { upper[j - 1] } else { 0.0 };
        let lo = if j + 1 < m { lower[j] } else { 0.0 };
        diag[j] = -(up + lo);
    }
    Ok(Tridiag { lower, diag, upper })
}

/// Dense method-of-lines generator `G` for the 1-D Fokker-Planck equation:
/// columns sum to zero and off-diagonals are nonnegative (conservative,
/// monotone scheme). See [`fp_solve_1d`] for the time integration.
pub fn fp_generator_1d(rho: &DensityField, beta: f64) -> Result<Array2<f64>> {
    Ok(fp_tridiag(rho, beta)?.dense())
}

/// Integrate `f' = G f` to time `t` with the adaptive Dormand-Prince
/// scheme (rel tol 1e-8). Sub-roundoff negative values (above -1e-9) are
/// clipped and the result is renormalized after the mass-drift check.
pub fn fp_solve_1d(rho: &DensityField, beta: f64, f0: &DensityField, t: f64) -> Result<DensityField> {
    if rho.grid != f0.grid {
        return Err(Error::InvalidInput(
            "fp_solve_1d: density and initial condition live on different grids".into(),
        ));
    }
    let mass0 = f0.mass();
    if (mass0 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "fp_solve_1d: initial condition has mass {mass0}, expected 1"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "fp_solve_1d: time must be finite and nonnegative, got {t}"
        )));
    }
    let stencil = fp_tridiag(rho, beta)?;
    let values = dopri5(|f| stencil.apply(f), &f0.values, t, 1e-8, 1e-10)?;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-9 {
        return Err(Error::Numerical(format!(
            "fp_solve_1d: negative density {min} beyond roundoff"
        )));
    }
    let clipped = values.mapv(|v| v.max(0.0));
    let mass = clipped.sum() * rho.grid.h;
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "fp_solve_1d: mass drifted to {mass}"
        )));
    }
    DensityField::new(rho.grid.clone(), clipped / mass)
}

/// Normalized grid weights `exp(s ln rho - max)` for `s = beta/(1-beta)`,
/// evaluated in log space so extreme exponents stay finite.
fn maxwellian_weights(ln_rho: &Array1<f64>, beta: f64, h: f64) -> Result<Array1<f64>> {
    validate_beta(beta)?;
    if beta == 1.0 {
        return Err(Error::Unsupported(
            "maxwellian: beta = 1 has no absolutely continuous steady state".into(),
        ));
    }
    let s = beta / (1.0 - beta);
    let top = ln_rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w = ln_rho.mapv(|l| (s * (l - top)).exp());
    let mass = w.sum() * h;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Numerical(format!(
            "maxwellian: degenerate normalization {mass}"
        )));
    }
    Ok(w / mass)
}

/// Steady state `c rho^{beta/(1-beta)}` of the Fokker-Planck equation,
/// normalized on the grid. `beta = 1` is unsupported.
pub fn maxwellian_exact(rho: &DensityField, beta: f64) -> Result<DensityField> {
    let ln_rho = positive_log_values(rho)?;
    let values = maxwellian_weights(&ln_rho, beta, rho.grid.h)?;
    DensityField::new(rho.grid.clone(), values)
}

/// Steady state `c kde_gamma^{beta/(1-beta)}` built from a kernel density
/// estimate of 1-D samples, normalized on the grid.
pub fn maxwellian_kde(
    samples: &PointCloud,
    gamma: f64,
    beta: f64,
    grid: &Grid1D,
) -> Result<DensityField> {
    if samples.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "maxwellian_kde: need 1-D samples, got dimension {}",
            samples.dim()
        )));
    }
    let queries = Array2::from_shape_fn((grid.m, 1), |(j, _)| grid.centers[j]);
    let rho_hat = kde(&samples.points, &queries, gamma)?;
    if rho_hat.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Numerical(
            "maxwellian_kde: estimated density vanished on the grid".into(),
        ));
    }
    let ln_rho = rho_hat.mapv(f64::ln);
    let values = maxwellian_weights(&ln_rho, beta, grid.h)?;
    DensityField::new(grid.clone(), values)
}

/// Symmetrized generator `S = -(A + A^T)/2` with
/// `A = Pi^{-1/2} G Pi^{1/2}` and `Pi` the diagonal of the discrete
/// Maxwellian. The scheme is in detailed balance with respect to `Pi`, so
/// `A` is symmetric up to roundoff and `S` is PSD with smallest eigenvalue
/// zero (eigenvector `sqrt(Pi)`). Requires `0 < beta < 1`.
pub fn witten_matrix_1d(rho: &DensityField, beta: f64) -> Result<Array2<f64>> {
    validate_beta(beta)?;
    if beta == 0.0 || beta == 1.0 {
        return Err(Error::Unsupported(format!(
            "witten_matrix_1d: beta must lie strictly inside (0, 1), got {beta}"
        )));
    }
    let stencil = fp_tridiag(rho, beta)?;
    let ln_rho = positive_log_values(rho)?;
    let s = beta / (1.0 - beta);
    let m = rho.grid.m;
    let mut out = Array2::zeros((m, m));
    for j in 0..m {
        out[[j, j]] = -stencil.diag[j];
    }
    for j in 0..m - 1 {
        // sqrt(pi_j / pi_{j+1}) in log space
        let half = (0.5 * s * (ln_rho[j] - ln_rho[j + 1])).exp();
        let a_lower = stencil.lower[j] * half;
        let a_upper = stencil.upper[j] / half;
        let sym = -0.5 * (a_lower + a_upper);
        out[[j + 1, j]] = sym;
        out[[j, j + 1]] = sym;
    }
    Ok(out)
}

/// Which 1-D factor carries the smaller spectral gap in a product density:
/// `X` means the x-factor's second eigenvalue is smaller (the slow mode
/// separates along x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SplitAxis {
    X,
    Y,
}

/// Eigenstructure report for a separable 2-D density `rho1(x) rho2(y)`.
#[derive(Debug, Clone, Serialize)]
pub struct WittenProductReport {
    /// Ascending spectrum of the x-factor operator.
    pub lambda_x: Vec<f64>,
    /// Ascending spectrum of the y-factor operator.
    pub lambda_y: Vec<f64>,
    /// Max deviation between the 2-D tensor spectrum and the sorted sums
    /// `lambda_x[i] + lambda_y[j]`.
    pub kronecker_max_dev: f64,
    /// The factor whose second eigenvalue is smaller.
    pub preferred: SplitAxis,
}

/// Build the two 1-D symmetrized operators of a separable density, verify
/// that the dense Kronecker sum `S1 (+) S2` has exactly the sum-set
/// spectrum, and report which axis owns the smaller spectral gap. The
/// tensor operator is dense `(m1 m2)^2`, so keep the grids modest.
pub fn witten_product_check(
    rho1: &DensityField,
    rho2: &DensityField,
    beta: f64,
) -> Result<WittenProductReport> {
    let s1 = witten_matrix_1d(rho1, beta)?;
    let s2 = witten_matrix_1d(rho2, beta)?;
    let (lam1, _) = sym_eig(&s1);
    let (lam2, _) = sym_eig(&s2);
    let (m1, m2) = (rho1.grid.m, rho2.grid.m);
    let mut tensor = Array2::zeros((m1 * m2, m1 * m2));
    for i in 0..m1 {
        for j in 0..m1 {
            if s1[[i, j]] != 0.0 {
                for k in 0..m2 {
                    tensor[[i * m2 + k, j * m2 + k]] += s1[[i, j]];
                }
            }
        }
    }
    for k in 0..m2 {
        for l in 0..m2 {
            if s2[[k, l]] != 0.0 {
                for i in 0..m1 {
                    tensor[[i * m2 + k, i * m2 + l]] += s2[[k, l]];
                }
            }
        }
    }
    let (lam2d, _) = sym_eig(&tensor);
    let mut sums = Vec::with_capacity(m1 * m2);
    for &a in lam1.iter() {
        for &b in lam2.iter() {
            sums.push(a + b);
        }
    }
    sums.sort_by(f64::total_cmp);
    let kronecker_max_dev = lam2d
        .iter()
        .zip(sums.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    let preferred = if lam1[1] < lam2[1] {
        SplitAxis::X
    } else {
        SplitAxis::Y
    };
    Ok(WittenProductReport {
        lambda_x: lam1.to_vec(),
        lambda_y: lam2.to_vec(),
        kronecker_max_dev,
        preferred,
    })
}

/// Smooth the atomic measure `sum_i view_i delta_{x_i}` with a Gaussian of
/// bandwidth `gamma` onto the grid and return its L1 distance to `field`.
/// The view is used as given: normalize it first when comparing against a
/// unit-mass field.
pub fn fp_steady_state_compare(
    positions: &Array1<f64>,
    view: &Array1<f64>,
    field: &DensityField,
    gamma: f64,
) -> Result<f64> {
    let smoothed = smooth_onto_grid(positions, view, &field.grid, gamma)?;
    smoothed.l1_distance(field)
}

/// Mollify a weighted atomic measure `sum_i view_i delta_{x_i}` onto the
/// grid with a Gaussian of bandwidth `gamma`, evaluated at cell centers.
/// The result is not renormalized: its mass is the total weight up to
/// boundary truncation.
pub fn smooth_onto_grid(
    positions: &Array1<f64>,
    view: &Array1<f64>,
    grid: &Grid1D,
    gamma: f64,
) -> Result<DensityField> {
    if positions.len() != view.len() {
        return Err(Error::InvalidInput(format!(
            "smooth_onto_grid: {} positions vs {} weights",
            positions.len(),
            view.len()
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "smooth_onto_grid: bandwidth must be positive, got {gamma}"
        )));
    }
    if positions.iter().any(|&x| x < grid.a || x > grid.b) {
        return Err(Error::InvalidInput(
            "smooth_onto_grid: positions must lie inside the grid domain".into(),
        ));
    }
    if view.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(
            "smooth_onto_grid: weights must be finite and nonnegative".into(),
        ));
    }
    let values = Array1::from_shape_fn(grid.m, |j| {
        let xj = grid.centers[j];
        positions
            .iter()
            .zip(view.iter())
            .map(|(&xi, &ui)| ui * gaussian_kernel(xj - xi, gamma, 1))
            .sum()
    });
    DensityField::new(grid.clone(), values)
}
