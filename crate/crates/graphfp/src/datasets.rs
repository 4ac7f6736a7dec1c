//! Synthetic data densities, seeded rejection samplers, and ground-truth
//! component labels for the experiment fixtures.

use libm::erf;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::graph::PointCloud;
use crate::{Error, Result};

/// Axis-aligned product domain (an interval, or a rectangle).
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    /// Closed `[lo, hi]` interval per coordinate.
    pub intervals: Vec<(f64, f64)>,
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain {
            intervals: vec![(lo, hi)],
        }
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64)) -> Self {
        Domain {
            intervals: vec![x, y],
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.intervals.iter())
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(|&(lo, hi)| hi - lo).product()
    }

    pub fn side_length(&self, axis: usize) -> f64 {
        let (lo, hi) = self.intervals[axis];
        hi - lo
    }
}

/// Axis-aligned rectangle used by the piecewise-constant 2-D densities.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    x: (f64, f64),
    y: (f64, f64),
}

impl Rect {
    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }

    fn area(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.y.1 - self.y.0)
    }
}

/// Plateau fixture parameters: `heights[i]` on
/// `[breakpoints[i], breakpoints[i+1]]`. This density is a configurable
/// stand-in for a plateau-shaped distribution; the default segments are a
/// fixture choice, not a quantity with an external reference.
#[derive(Debug, Clone, PartialEq)]
pub struct MesaParams {
    pub breakpoints: Vec<f64>,
    pub heights: Vec<f64>,
}

impl Default for MesaParams {
    fn default() -> Self {
        MesaParams {
            breakpoints: vec![-1.5, -1.1, -0.3, 0.3, 0.8, 1.5],
            heights: vec![0.2, 2.0, 0.2, 1.2, 0.2],
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Uniform,
    /// Truncated Gaussian mixture: `sum_i weights[i] phi_{sigmas[i]}(x - centers[i])`,
    /// renormalized on the domain.
    Mixture1D {
        weights: Vec<f64>,
        sigmas: Vec<f64>,
        centers: Vec<f64>,
    },
    /// Product of an x-Gaussian and a two-bump y-mixture, renormalized.
    BlueSky {
        sigma_x: f64,
        sigma_y: f64,
        offset: f64,
    },
    /// Piecewise constant: height 4 on the narrow rectangle, height 1 on the
    /// circles and the wide rectangle (narrow rectangle wins overlaps).
    ThreeBlobs {
        centers: [(f64, f64); 3],
        radius: f64,
        wide: Rect,
        narrow: Rect,
    },
    Mesa(MesaParams),
}

/// A named synthetic density on a product domain: evaluator, analytic
/// normalization, component map for ground-truth labels, and a precomputed
/// rejection envelope.
#[derive(Debug, Clone)]
pub struct SyntheticDensity {
    pub name: String,
    pub domain: Domain,
    /// Multiplier that makes the shape integrate to one over the domain.
    pub normalizer: f64,
    /// Strict upper bound for rejection sampling (max of the density, with
    /// 5% headroom).
    envelope: f64,
    shape: Shape,
}

fn gauss_pdf(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Mass of the Gaussian `phi_sigma(x - mu)` on `[lo, hi]`.
fn gauss_mass(sigma: f64, mu: f64, lo: f64, hi: f64) -> f64 {
    let s = sigma * 2.0_f64.sqrt();
    0.5 * (erf((hi - mu) / s) - erf((lo - mu) / s))
}

/// Adaptive Simpson quadrature with absolute tolerance.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, lm, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, rm, b, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, b, simpson(f, a, m, b), tol, depth)
}

/// Area of a disc intersected with an axis-aligned rectangle: the clipped
/// chord width integrated over y, split at the heights where the circle
/// crosses the rectangle's vertical edges.
fn disc_rect_area(cx: f64, cy: f64, r: f64, rect: &Rect) -> f64 {
    let y0 = rect.y.0.max(cy - r);
    let y1 = rect.y.1.min(cy + r);
    if y1 <= y0 {
        return 0.0;
    }
    let width = |y: f64| {
        let dy = y - cy;
        let half = (r * r - dy * dy).max(0.0).sqrt();
        let lo = (cx - half).max(rect.x.0);
        let hi = (cx + half).min(rect.x.1);
        (hi - lo).max(0.0)
    };
    let mut cuts = vec![y0, y1];
    for &xe in &[rect.x.0, rect.x.1] {
        let dx = xe - cx;
        if dx.abs() < r {
            let dy = (r * r - dx * dx).sqrt();
            for cand in [cy - dy, cy + dy] {
                if cand > y0 && cand < y1 {
                    cuts.push(cand);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| adaptive_simpson(&width, w[0], w[1], 1e-12, 40))
        .sum()
}

const BLOB_RADIUS: f64 = 0.25;
const BLOB_WIDE: Rect = Rect {
    x: (0.25, 0.75),
    y: (-0.125, 0.125),
};
const BLOB_NARROW: Rect = Rect {
    x: (-0.75, 0.25),
    y: (-0.04, 0.04),
};
const BLOB_NARROW_HEIGHT: f64 = 4.0;

impl SyntheticDensity {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Density value at a point; zero outside the domain.
    pub fn eval(&self, point: &[f64]) -> f64 {
        if !self.domain.contains(point) {
            return 0.0;
        }
        let raw = match &self.shape {
            Shape::Uniform => 1.0,
            Shape::Mixture1D {
                weights,
                sigmas,
                centers,
            } => {
                let x = point[0];
                weights
                    .iter()
                    .zip(sigmas.iter())
                    .zip(centers.iter())
                    .map(|((&w, &s), &c)| w * gauss_pdf(x - c, s))
                    .sum()
            }
            Shape::BlueSky {
                sigma_x,
                sigma_y,
                offset,
            } => {
                let (x, y) = (point[0], point[1]);
                gauss_pdf(x, *sigma_x)
                    * (gauss_pdf(y - offset, *sigma_y) + gauss_pdf(y + offset, *sigma_y))
            }
            Shape::ThreeBlobs {
                centers,
                radius,
                wide,
                narrow,
            } => {
                let (x, y) = (point[0], point[1]);
                if narrow.contains(x, y) {
                    BLOB_NARROW_HEIGHT
                } else if centers.iter().any(|&(cx, cy)| {
                    (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius
                }) || wide.contains(x, y)
                {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Mesa(p) => p.heights[mesa_segment(p, point[0])],
        };
        raw * self.normalizer
    }

    /// Ground-truth component index of a point in the domain. Mixtures use
    /// the maximum-responsibility component, the two-line density splits on
    /// the sign of y (0 = top), the blob density takes the nearest circle
    /// center, and plateau densities report the segment index.
    pub fn component(&self, point: &[f64]) -> Result<usize> {
        if !self.domain.contains(point) {
            return Err(Error::InvalidInput(format!(
                "component: point {point:?} lies outside the domain of {}",
                self.name
            )));
        }
        Ok(match &self.shape {
            Shape::Uniform => 0,
            Shape::Mixture1D {
                weights,
                sigmas,
                centers,
            } => {
                let x = point[0];
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for i in 0..weights.len() {
                    let v = weights[i] * gauss_pdf(x - centers[i], sigmas[i]);
                    if v > best_val {
                        best_val = v;
                        best = i;
                    }
                }
                best
            }
            Shape::BlueSky { .. } => {
                if point[1] >= 0.0 {
                    0
                } else {
                    1
                }
            }
            Shape::ThreeBlobs { centers, .. } => {
                let (x, y) = (point[0], point[1]);
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, &(cx, cy)) in centers.iter().enumerate() {
                    let d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            }
            Shape::Mesa(p) => mesa_segment(p, point[0]),
        })
    }

    pub fn n_components(&self) -> usize {
        match &self.shape {
            Shape::Uniform => 1,
            Shape::Mixture1D { weights, .. } => weights.len(),
            Shape::BlueSky { .. } => 2,
            Shape::ThreeBlobs { .. } => 3,
            Shape::Mesa(p) => p.heights.len(),
        }
    }

    /// Rejection sampling against the domain's bounding box with the
    /// precomputed envelope; deterministic given the seed, labels populated
    /// from the component map.
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointCloud> {
        if n == 0 {
            return Err(Error::InvalidInput("sample: n must be >= 1".into()));
        }
        if !self.envelope.is_finite() || self.envelope <= 0.0 {
            return Err(Error::Numerical(format!(
                "sample: bad rejection envelope {} for {}",
                self.envelope, self.name
            )));
        }
        let dim = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords = Vec::with_capacity(n * dim);
        let mut labels = Vec::with_capacity(n);
        let mut point = vec![0.0_f64; dim];
        let max_draws = n.saturating_mul(10_000).saturating_add(100_000);
        let mut draws = 0usize;
        while labels.len() < n {
            draws += 1;
            if draws > max_draws {
                return Err(Error::Numerical(format!(
                    "sample: rejection sampling for {} exceeded {max_draws} draws",
                    self.name
                )));
            }
            for (a, &(lo, hi)) in self.domain.intervals.iter().enumerate() {
                point[a] = rng.gen_range(lo..hi);
            }
            let u: f64 = rng.gen_range(0.0..self.envelope);
            if u < self.eval(&point) {
                coords.extend_from_slice(&point);
                labels.push(self.component(&point)?);
            }
        }
        let points = Array2::from_shape_vec((n, dim), coords)
            .map_err(|e| Error::Numerical(format!("sample: {e}")))?;
        PointCloud::with_labels(points, labels)
    }

    /// The Dirac location the experiments start from, where one is
    /// established for this density; `None` means start from the uniform
    /// distribution.
    pub fn default_dirac_init(&self) -> Option<Vec<f64>> {
        match self.name.as_str() {
            "two_bump" | "uniform" => Some(vec![-0.1]),
            "blue_sky" => Some(vec![-0.26, -0.29]),
            "three_blobs" => Some(vec![0.07, 0.10]),
            _ => None,
        }
    }

    /// For the separable two-line density: the normalized 1-D factor
    /// densities (x-factor, y-factor), so that `rho(x, y) =
    /// rho_x(x) * rho_y(y)` exactly.
    pub fn marginal_factors(&self) -> Result<(SyntheticDensity, SyntheticDensity)> {
        match &self.shape {
            Shape::BlueSky {
                sigma_x,
                sigma_y,
                offset,
            } => {
                let (x_lo, x_hi) = self.domain.intervals[0];
                let (y_lo, y_hi) = self.domain.intervals[1];
                let fx = mixture_1d(
                    "blue_sky_x",
                    Domain::interval(x_lo, x_hi),
                    vec![1.0],
                    vec![*sigma_x],
                    vec![0.0],
                )?;
                let fy = mixture_1d(
                    "blue_sky_y",
                    Domain::interval(y_lo, y_hi),
                    vec![1.0, 1.0],
                    vec![*sigma_y, *sigma_y],
                    vec![*offset, -*offset],
                )?;
                Ok((fx, fy))
            }
            _ => Err(Error::Unsupported(format!(
                "marginal_factors: {} is not a separable product density",
                self.name
            ))),
        }
    }

    /// JSON fixture record: name, dimension, domain, normalizer, and the
    /// shape parameters.
    pub fn fixture(&self) -> serde_json::Value {
        let params = match &self.shape {
            Shape::Uniform => json!({}),
            Shape::Mixture1D {
                weights,
                sigmas,
                centers,
            } => json!({"weights": weights, "sigmas": sigmas, "centers": centers}),
            Shape::BlueSky {
                sigma_x,
                sigma_y,
                offset,
            } => json!({"sigma_x": sigma_x, "sigma_y": sigma_y, "offset": offset}),
            Shape::ThreeBlobs {
                centers, radius, ..
            } => json!({
                "centers": centers.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>(),
                "radius": radius,
                "narrow_height": BLOB_NARROW_HEIGHT,
            }),
            Shape::Mesa(p) => json!({"breakpoints": p.breakpoints, "heights": p.heights}),
        };
        json!({
            "name": self.name,
            "dim": self.dim(),
            "domain": self.domain.intervals,
            "normalizer": self.normalizer,
            "params": params,
        })
    }
}

fn mesa_segment(p: &MesaParams, x: f64) -> usize {
    let last = p.heights.len() - 1;
    for i in 0..last {
        if x < p.breakpoints[i + 1] {
            return i;
        }
    }
    last
}

/// Grid-scan maximum of a callable over the domain, with 5% headroom.
fn scanned_envelope(domain: &Domain, eval: impl Fn(&[f64]) -> f64) -> f64 {
    let steps = if domain.dim() == 1 { 4000 } else { 500 };
    let mut max = 0.0_f64;
    let mut point = vec![0.0_f64; domain.dim()];
    // dimension is 1 or 2 throughout this module
    match domain.dim() {
        1 => {
            let (lo, hi) = domain.intervals[0];
            for i in 0..=steps {
                point[0] = lo + (hi - lo) * i as f64 / steps as f64;
                max = max.max(eval(&point));
            }
        }
        _ => {
            let (x_lo, x_hi) = domain.intervals[0];
            let (y_lo, y_hi) = domain.intervals[1];
            for i in 0..=steps {
                point[0] = x_lo + (x_hi - x_lo) * i as f64 / steps as f64;
                for j in 0..=steps {
                    point[1] = y_lo + (y_hi - y_lo) * j as f64 / steps as f64;
                    max = max.max(eval(&point));
                }
            }
        }
    }
    max * 1.05
}

fn mixture_1d(
    name: &str,
    domain: Domain,
    weights: Vec<f64>,
    sigmas: Vec<f64>,
    centers: Vec<f64>,
) -> Result<SyntheticDensity> {
    let (lo, hi) = domain.intervals[0];
    let mass: f64 = weights
        .iter()
        .zip(sigmas.iter())
        .zip(centers.iter())
        .map(|((&w, &s), &c)| w * gauss_mass(s, c, lo, hi))
        .sum();
    let shape = Shape::Mixture1D {
        weights,
        sigmas,
        centers,
    };
    let mut out = SyntheticDensity {
        name: name.into(),
        domain,
        normalizer: 1.0 / mass,
        envelope: 0.0,
        shape,
    };
    out.envelope = scanned_envelope(&out.domain, |p| out.eval(p));
    Ok(out)
}

/// Build one of the named synthetic densities:
/// `two_bump`, `uniform`, `deep_valley`, `three_bump`, `mesa` (default
/// plateaus), `blue_sky`, `three_blobs` (default circle centers).
pub fn density(name: &str) -> Result<SyntheticDensity> {
    let omega1 = Domain::interval(-1.5, 1.5);
    match name {
        "uniform" => {
            let volume = omega1.volume();
            Ok(SyntheticDensity {
                name: name.into(),
                domain: omega1,
                normalizer: 1.0 / volume,
                envelope: 1.05 / volume,
                shape: Shape::Uniform,
            })
        }
        "two_bump" => mixture_1d(
            name,
            omega1,
            vec![4.0, 1.0],
            vec![0.5, 0.25],
            vec![-0.5, 1.25],
        ),
        "deep_valley" => mixture_1d(
            name,
            omega1,
            vec![7.0, 3.0],
            vec![0.5, 0.15],
            vec![-0.5, 1.25],
        ),
        "three_bump" => mixture_1d(
            name,
            omega1,
            vec![1.0, 1.0, 4.0],
            vec![0.1, 0.1, 0.4],
            vec![0.5, 1.1, -1.0],
        ),
        "blue_sky" => {
            let domain = Domain::rectangle((-1.5, 1.5), (-1.0, 1.0));
            let (sigma_x, sigma_y, offset) = (1.0, 0.09, 0.32);
            let mass = gauss_mass(sigma_x, 0.0, -1.5, 1.5)
                * (gauss_mass(sigma_y, offset, -1.0, 1.0)
                    + gauss_mass(sigma_y, -offset, -1.0, 1.0));
            let mut out = SyntheticDensity {
                name: name.into(),
                domain,
                normalizer: 1.0 / mass,
                envelope: 0.0,
                shape: Shape::BlueSky {
                    sigma_x,
                    sigma_y,
                    offset,
                },
            };
            out.envelope = scanned_envelope(&out.domain, |p| out.eval(p));
            Ok(out)
        }
        "three_blobs" => three_blobs([(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]),
        "mesa" => mesa(MesaParams::default()),
        other => Err(Error::InvalidInput(format!(
            "unknown density {other:?}; expected one of two_bump, uniform, \
             deep_valley, three_bump, mesa, blue_sky, three_blobs"
        ))),
    }
}

/// Piecewise-constant blob density with custom circle centers: height 1 on
/// three radius-0.25 circles and the wide rectangle, height 4 on the narrow
/// rectangle (which wins overlaps), normalized on
/// `[-1.5, 1.5] x [-1, 1]`.
pub fn three_blobs(centers: [(f64, f64); 3]) -> Result<SyntheticDensity> {
    let domain = Domain::rectangle((-1.5, 1.5), (-1.0, 1.0));
    let r = BLOB_RADIUS;
    for (i, &(cx, cy)) in centers.iter().enumerate() {
        if !domain.contains(&[cx - r, cy - r]) || !domain.contains(&[cx + r, cy + r]) {
            return Err(Error::InvalidInput(format!(
                "three_blobs: circle {i} at ({cx}, {cy}) leaves the domain"
            )));
        }
        for &(ox, oy) in centers.iter().skip(i + 1) {
            let d2 = (cx - ox) * (cx - ox) + (cy - oy) * (cy - oy);
            if d2 < (2.0 * r) * (2.0 * r) - 1e-12 {
                return Err(Error::InvalidInput(
                    "three_blobs: circles must not overlap".into(),
                ));
            }
        }
    }
    let mut mass = BLOB_NARROW_HEIGHT * BLOB_NARROW.area() + BLOB_WIDE.area();
    for &(cx, cy) in &centers {
        mass += std::f64::consts::PI * r * r - disc_rect_area(cx, cy, r, &BLOB_NARROW);
        mass -= disc_rect_area(cx, cy, r, &BLOB_WIDE);
    }
    Ok(SyntheticDensity {
        name: "three_blobs".into(),
        domain,
        normalizer: 1.0 / mass,
        // piecewise-constant: the exact maximum is the tallest height
        envelope: 1.05 * BLOB_NARROW_HEIGHT / mass,
        shape: Shape::ThreeBlobs {
            centers,
            radius: r,
            wide: BLOB_WIDE,
            narrow: BLOB_NARROW,
        },
    })
}

/// Plateau density on `[breakpoints[0], breakpoints[last]]` with the given
/// segment heights.
pub fn mesa(params: MesaParams) -> Result<SyntheticDensity> {
    let b = &params.breakpoints;
    let h = &params.heights;
    if b.len() < 2 || h.len() != b.len() - 1 {
        return Err(Error::InvalidInput(format!(
            "mesa: {} breakpoints need {} heights, got {}",
            b.len(),
            b.len().saturating_sub(1),
            h.len()
        )));
    }
    if b.windows(2).any(|w| !(w[1] > w[0])) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "mesa: breakpoints must be finite and strictly increasing".into(),
        ));
    }
    if h.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "mesa: heights must be finite and nonnegative".into(),
        ));
    }
    let mass: f64 = h
        .iter()
        .zip(b.windows(2))
        .map(|(&height, w)| height * (w[1] - w[0]))
        .sum();
    if !(mass > 0.0) {
        return Err(Error::Degenerate("mesa: zero total mass".into()));
    }
    let top = h.iter().cloned().fold(0.0, f64::max);
    let domain = Domain::interval(b[0], b[b.len() - 1]);
    Ok(SyntheticDensity {
        name: "mesa".into(),
        domain,
        normalizer: 1.0 / mass,
        envelope: 1.05 * top / mass,
        shape: Shape::Mesa(params),
    })
}

/// Component index of `point` under the density's ground-truth map.
pub fn ground_truth(density: &SyntheticDensity, point: &[f64]) -> Result<usize> {
    density.component(point)
}
