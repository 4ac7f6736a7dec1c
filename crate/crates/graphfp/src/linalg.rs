//! Internal dense numerics: symmetric eigendecomposition (faer), LU solves
//! (nalgebra), matrix exponential by scaling-and-squaring Pade approximation,
//! and an adaptive Dormand-Prince 4(5) integrator.

use faer::Side;
use nalgebra::DMatrix;
use ndarray::{Array1, Array2};

use crate::{Error, Result};

pub(crate) fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    let (r, c) = a.dim();
    DMatrix::from_row_iterator(r, c, a.iter().cloned())
}

pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Array2<f64> {
    let (r, c) = m.shape();
    Array2::from_shape_fn((r, c), |(i, j)| m[(i, j)])
}

/// Eigendecomposition of a symmetric matrix. Returns eigenvalues in ascending
/// order and the matching orthonormal eigenvectors as columns.
pub(crate) fn sym_eig(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    let m = faer::Mat::from_fn(n, n, |i, j| a[[i, j]]);
    let evd = m.selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s.read(i).total_cmp(&s.read(j)));
    let values = Array1::from_iter(order.iter().map(|&i| s.read(i)));
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| u.read(i, order[j]));
    (values, vectors)
}

/// Solves `a x = b` for a matrix right-hand side via LU with partial pivoting.
pub(crate) fn lu_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let lu = to_nalgebra(a).lu();
    match lu.solve(&to_nalgebra(b)) {
        Some(x) => Ok(from_nalgebra(&x)),
        None => Err(Error::Numerical("lu_solve: matrix is singular".into())),
    }
}

fn one_norm(a: &Array2<f64>) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let s = a.column(j).iter().map(|v| v.abs()).sum::<f64>();
        best = best.max(s);
    }
    best
}

// Pade numerator coefficients and 1-norm thresholds for degrees 3..13
// (Higham, "The scaling and squaring method for the matrix exponential
// revisited", 2005).
const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

/// Pade approximant of order (m, m) evaluated at `a`, for m in {3, 5, 7, 9}.
fn pade_low(a: &Array2<f64>, b: &[f64]) -> Result<Array2<f64>> {
    let n = a.nrows();
    let eye: Array2<f64> = Array2::eye(n);
    let a2 = a.dot(a);
    // powers[p] = a^(2p)
    let mut powers = vec![eye.clone(), a2.clone()];
    while powers.len() < b.len() / 2 {
        let next = powers.last().unwrap().dot(&a2);
        powers.push(next);
    }
    let mut u_inner = Array2::zeros((n, n));
    let mut v = Array2::zeros((n, n));
    for (k, &bk) in b.iter().enumerate() {
        if k % 2 == 1 {
            u_inner = u_inner + &powers[(k - 1) / 2] * bk;
        } else {
            v = v + &powers[k / 2] * bk;
        }
    }
    let u = a.dot(&u_inner);
    lu_solve(&(&v - &u), &(&v + &u))
}

/// Degree-13 Pade approximant (used after scaling).
fn pade13(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let eye: Array2<f64> = Array2::eye(n);
    let b = &B13;
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let u_hi = a6.dot(&(&a6 * b[13] + &a4 * b[11] + &a2 * b[9]));
    let u = a.dot(&(u_hi + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &eye * b[1]));
    let v_hi = a6.dot(&(&a6 * b[12] + &a4 * b[10] + &a2 * b[8]));
    let v = v_hi + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &eye * b[0];
    lu_solve(&(&v - &u), &(&v + &u))
}

/// Matrix exponential by scaling-and-squaring with Pade approximants.
pub(crate) fn expm(a: &Array2<f64>) -> Result<Array2<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("expm: matrix must be square".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("expm: non-finite entry".into()));
    }
    let norm = one_norm(a);
    if norm <= THETA3 {
        return pade_low(a, &B3);
    } else if norm <= THETA5 {
        return pade_low(a, &B5);
    } else if norm <= THETA7 {
        return pade_low(a, &B7);
    } else if norm <= THETA9 {
        return pade_low(a, &B9);
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2.0_f64.powi(s as i32);
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

// Dormand-Prince 4(5) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order solution weights (same as the last A row) and embedded 4th-order weights.
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the autonomous system `y' = deriv(y)` from 0 to `t_end` with an
/// adaptive Dormand-Prince 4(5) scheme. The error test is
/// `|e_i| <= atol + rtol * max(|y_i|, |y_new_i|)` componentwise (RMS-combined).
pub(crate) fn dopri5<F>(
    deriv: F,
    y0: &Array1<f64>,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<Array1<f64>>
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(
            "dopri5: t_end must be finite and nonnegative".into(),
        ));
    }
    let n = y0.len();
    let mut y = y0.clone();
    if t_end == 0.0 {
        return Ok(y);
    }
    let mut t = 0.0_f64;
    let f0 = deriv(&y);
    // Initial step from the scale of y'/y; clamped into a sane range.
    let scale0 = f0.iter().map(|v| v.abs()).fold(0.0_f64, f64::max).max(1e-12);
    let mut dt = (0.01 / scale0).min(t_end).max(t_end * 1e-12);
    let mut k: Vec<Array1<f64>> = vec![Array1::zeros(n); 7];
    k[0] = f0;
    let mut first_same_as_last = true; // k[0] already holds deriv(y)
    const MAX_STEPS: usize = 50_000_000;
    for step in 0..MAX_STEPS {
        if step == MAX_STEPS - 1 {
            return Err(Error::Numerical("dopri5: step limit exceeded".into()));
        }
        if t + dt > t_end {
            dt = t_end - t;
        }
        if !first_same_as_last {
            k[0] = deriv(&y);
        }
        for stage in 1..7 {
            let mut arg = y.clone();
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    arg.scaled_add(dt * a, kj);
                }
            }
            debug_assert!(DP_C[stage] <= 1.0);
            k[stage] = deriv(&arg);
        }
        let mut y5 = y.clone();
        let mut err_vec = Array1::<f64>::zeros(n);
        for (j, kj) in k.iter().enumerate() {
            if DP_B5[j] != 0.0 {
                y5.scaled_add(dt * DP_B5[j], kj);
            }
            let db = DP_B5[j] - DP_B4[j];
            if db != 0.0 {
                err_vec.scaled_add(dt * db, kj);
            }
        }
        let mut err_norm = 0.0_f64;
        for i in 0..n {
            let sc = atol + rtol * y[i].abs().max(y5[i].abs());
            let r = err_vec[i] / sc;
            err_norm += r * r;
        }
        err_norm = (err_norm / n as f64).sqrt();
        if err_norm <= 1.0 {
            t += dt;
            y = y5;
            // FSAL: stage 7 of an accepted step is deriv at the new point.
            k[0] = k[6].clone();
            first_same_as_last = true;
            if t >= t_end {
                return Ok(y);
            }
        } else {
            first_same_as_last = false;
        }
        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        dt *= factor;
        if !(dt.is_finite() && dt > 0.0) || t + dt == t {
            return Err(Error::Numerical(
                "dopri5: step size underflow (system too stiff for the tolerance)".into(),
            ));
        }
    }
    unreachable!()
}
