//! Direct definitions of the functions whose prox the solver crate
//! computes, written over flat coordinate slices for [`crate::prox_oracle`].
//!
//! Symmetric 2x2 matrices `[[p, q], [q, r]]` use the coordinates
//! `(p, sqrt(2) q, r)`, which make the Frobenius norm Euclidean. General
//! matrices use column-major entries.

use smoothprox_core::Mat;

const SQRT2: f64 = std::f64::consts::SQRT_2;

pub fn sym2_from_coords(c: &[f64]) -> Mat {
    let q = c[1] / SQRT2;
    Mat::from_row_slice(2, 2, &[c[0], q, q, c[2]])
}

pub fn sym2_coords(m: &Mat) -> [f64; 3] {
    [m[(0, 0)], SQRT2 * 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]]
}

/// Eigenvalues of a symmetric 2x2 matrix given in coordinates, ascending.
pub fn sym2_eigenvalues(c: &[f64]) -> [f64; 2] {
    let (p, q, r) = (c[0], c[1] / SQRT2, c[2]);
    let mid = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
    [mid - rad, mid + rad]
}

pub fn l1(scale: f64) -> impl Fn(&[f64]) -> f64 {
    move |u| scale * u.iter().map(|v| v.abs()).sum::<f64>()
}

/// `lambda * max_i X_ii` for a column-major `n x n` matrix.
pub fn max_diag(lambda: f64, n: usize) -> impl Fn(&[f64]) -> f64 {
    move |u| {
        lambda
            * (0..n)
                .map(|i| u[i * n + i])
                .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Support function of the probability simplex.
pub fn max_entry(u: &[f64]) -> f64 {
    u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn l1_residual(lambda: f64, data: Vec<f64>) -> impl Fn(&[f64]) -> f64 {
    move |u| lambda * u.iter().zip(&data).map(|(a, b)| (b - a).abs()).sum::<f64>()
}

/// Trace norm of a column-major 2x2 matrix: `(s1 + s2)^2 = |X|_F^2 + 2 |det X|`.
pub fn trace_norm_2x2(u: &[f64]) -> f64 {
    let det = u[0] * u[3] - u[1] * u[2];
    let fro2: f64 = u.iter().map(|v| v * v).sum();
    (fro2 + 2.0 * det.abs()).sqrt()
}

/// Eigenvalues down to `-1e-12 * max(1, |c|)` count as nonnegative, so
/// rounding in a projected candidate does not read as infeasible.
pub fn psd_indicator_2x2(c: &[f64]) -> f64 {
    let scale = c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if sym2_eigenvalues(c)[0] >= -1e-12 * scale {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn neg_logdet_2x2(c: &[f64]) -> f64 {
    let [lo, hi] = sym2_eigenvalues(c);
    if lo > 0.0 {
        -(lo.ln() + hi.ln())
    } else {
        f64::INFINITY
    }
}

/// Projection onto `{x : A x = b}` from the KKT system
/// `[[I, A^T], [A, 0]] [u; mu] = [x; b]`, solved by LU.
pub fn affine_projection(a: &Mat, b: &Mat, x: &Mat) -> Option<Mat> {
    let (m, d) = a.shape();
    let mut k = Mat::zeros(d + m, d + m);
    k.view_mut((0, 0), (d, d)).fill_with_identity();
    k.view_mut((0, d), (d, m)).copy_from(&a.transpose());
    k.view_mut((d, 0), (m, d)).copy_from(a);
    let mut rhs = Mat::zeros(d + m, 1);
    rhs.view_mut((0, 0), (d, 1)).copy_from(x);
    rhs.view_mut((d, 0), (m, 1)).copy_from(b);
    let sol = k.lu().solve(&rhs)?;
    Some(sol.rows(0, d).into_owned())
}
