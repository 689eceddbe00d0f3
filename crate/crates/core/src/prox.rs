//! Proximity operators `prox_phi(x, alpha) = argmin_u |x - u|^2 / (2 alpha) + phi(u)`
//! and Euclidean projections used by the bundled problem formulations.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{self, SpdFactor};
use crate::math;
use crate::{Error, Mat, Result};

/// Relative asymmetry accepted by the symmetric-matrix operators before
/// they symmetrize their input.
pub const SYMMETRY_TOL: f64 = 1e-8;

fn check_positive(v: f64, name: &str) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_symmetric(x: &Mat, what: &str) -> Result<()> {
    linalg::check_square(x, what)?;
    let scale = x.amax().max(1.0);
    let asym = linalg::asymmetry(x);
    if !(asym <= SYMMETRY_TOL * scale) {
        return Err(Error::invalid(format!(
            "{what}: matrix is not symmetric (max |x_ij - x_ji| = {asym:e})"
        )));
    }
    Ok(())
}

/// Elementwise shrinkage `sign(v) max(|v| - tau, 0)`.
pub fn soft_threshold(v: &Mat, tau: f64) -> Result<Mat> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!(
            "soft_threshold: tau must be >= 0, got {tau}"
        )));
    }
    Ok(v.map(|x| shrink(x, tau)))
}

#[inline]
fn shrink(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Singular value thresholding, the prox of `tau |.|_tr`. Also returns the
/// number of singular values that survive.
pub fn svt(x: &Mat, tau: f64) -> Result<(Mat, usize)> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("svt: tau must be >= 0, got {tau}")));
    }
    let svd = linalg::thin_svd(x)?;
    let rank = svd.s.iter().filter(|&&s| s > tau).count();
    Ok((svd.reconstruct_with(|s| (s - tau).max(0.0)), rank))
}

/// Result of a PSD-cone projection.
#[derive(Debug, Clone)]
pub struct PsdProjection {
    pub matrix: Mat,
    /// Eigenvalues kept above the rounding level `n eps max|lambda|`.
    pub rank: usize,
    /// Eigenpairs requested in the final eigensolver call; at most `n`.
    pub eigenpairs_computed: usize,
    pub eigensolver_calls: usize,
}

/// Projection onto the positive semidefinite cone by clamping eigenvalues
/// at zero.
///
/// With `rank_hint = Some(r)` only the top `c = min(n, r + 1)` eigenpairs
/// are requested; while the smallest of them is still positive `c` grows
/// by 5 and the request is repeated. With `None` the full spectrum is used.
pub fn psd_project(x: &Mat, rank_hint: Option<usize>) -> Result<PsdProjection> {
    check_symmetric(x, "psd_project")?;
    let n = x.nrows();
    let (pairs, calls) = match rank_hint {
        None => (linalg::sym_eig(x)?, 1),
        Some(hint) => {
            let mut c = (hint + 1).clamp(1, n);
            let mut calls = 0;
            loop {
                let pairs = linalg::partial_sym_eig(x, c)?;
                calls += 1;
                let smallest = pairs.values[c - 1];
                if smallest > 0.0 && c < n {
                    c = (c + 5).min(n);
                } else {
                    break (pairs, calls);
                }
            }
        }
    };
    let top = pairs.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = n as f64 * f64::EPSILON * top;
    Ok(PsdProjection {
        matrix: pairs.reconstruct_with(|v| v.max(0.0)),
        rank: pairs.values.iter().filter(|&&v| v > floor).count(),
        eigenpairs_computed: pairs.len(),
        eigensolver_calls: calls,
    })
}

/// Euclidean projection onto the probability simplex, by sorting and
/// thresholding.
pub fn simplex_project(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::invalid("simplex_project: empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("simplex_project: non-finite entry"));
    }
    let tau = simplex_threshold(v);
    Ok(v.iter().map(|&x| (x - tau).max(0.0)).collect())
}

/// The `tau` with `sum_i max(v_i - tau, 0) = 1`.
fn simplex_threshold(v: &[f64]) -> f64 {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    tau
}

/// Prox of `lambda * max_i X_ii` with parameter `alpha`.
///
/// The diagonal is clipped from above at the level `tau` where
/// `sum_i (d_i - tau)_+ = alpha lambda`; off-diagonal entries are copied.
pub fn max_diag_prox(x: &Mat, alpha: f64, lambda: f64) -> Result<Mat> {
    check_positive(alpha, "max_diag_prox: alpha")?;
    check_positive(lambda, "max_diag_prox: lambda")?;
    linalg::check_square(x, "max_diag_prox")?;
    let t = alpha * lambda;
    let scaled: Vec<f64> = x.diagonal().iter().map(|d| d / t).collect();
    let p = simplex_project(&scaled)?;
    let mut out = x.clone();
    for (i, pi) in p.iter().enumerate() {
        out[(i, i)] -= t * pi;
    }
    Ok(out)
}

/// Prox of `-log det(.) + indicator(positive definite)`: each eigenvalue `s`
/// maps to the positive root of `g^2 - s g - alpha = 0`.
pub fn logdet_prox(x: &Mat, alpha: f64) -> Result<Mat> {
    check_positive(alpha, "logdet_prox: alpha")?;
    check_symmetric(x, "logdet_prox")?;
    let pairs = linalg::sym_eig(x)?;
    Ok(pairs.reconstruct_with(|s| logdet_root(s, alpha)))
}

#[inline]
pub(crate) fn logdet_root(s: f64, alpha: f64) -> f64 {
    let s = s.clamp(-1e150, 1e150);
    let disc = math::sqrt(s * s + 4.0 * alpha);
    if s >= 0.0 {
        0.5 * (s + disc)
    } else {
        // same root, written without cancellation
        2.0 * alpha / (disc - s)
    }
}

/// Prox of `lambda |M - W|_1` in `W`: `M - soft_threshold(M - W, alpha lambda)`.
pub fn l1_residual_prox(w: &Mat, alpha: f64, lambda: f64, data: &Mat) -> Result<Mat> {
    check_positive(alpha, "l1_residual_prox: alpha")?;
    check_positive(lambda, "l1_residual_prox: lambda")?;
    if w.shape() != data.shape() {
        return Err(Error::invalid(format!(
            "l1_residual_prox: shape {:?} does not match data {:?}",
            w.shape(),
            data.shape()
        )));
    }
    let t = alpha * lambda;
    Ok(data.zip_map(w, |m, x| m - shrink(m - x, t)))
}

/// The affine set `{x : A x = b}` with a cached factorization of `A A^T`.
#[derive(Debug, Clone)]
pub struct AffineSet {
    a: Mat,
    b: Mat,
    gram: SpdFactor,
}

impl AffineSet {
    /// `a` is `m x d` with full row rank, `b` has `m` entries.
    pub fn new(a: Mat, b: Mat) -> Result<Self> {
        let (m, d) = a.shape();
        if m == 0 || m > d {
            return Err(Error::invalid(format!(
                "affine set: need 1 <= m <= d, got A of shape {m}x{d}"
            )));
        }
        if b.shape() != (m, 1) {
            return Err(Error::invalid(format!(
                "affine set: b must be {m}x1, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        linalg::check_finite(&a, "affine set A")?;
        linalg::check_finite(&b, "affine set b")?;
        let gram = SpdFactor::new(&(&a * a.transpose())).map_err(|e| match e {
            Error::Numerical { message, iteration } => Error::Numerical {
                message: format!("A does not have full row rank ({message})"),
                iteration,
            },
            other => other,
        })?;
        Ok(AffineSet { a, b, gram })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// `A^T (A A^T)^{-1} b`, the minimum-norm point of the set.
    pub fn min_norm_point(&self) -> Result<Mat> {
        Ok(self.a.transpose() * self.gram.solve(&self.b)?)
    }

    pub fn residual_norm(&self, x: &Mat) -> f64 {
        (&self.a * x - &self.b).norm()
    }

    pub fn contains(&self, x: &Mat, tol: f64) -> bool {
        self.residual_norm(x) <= tol * (1.0 + self.b.norm())
    }
}

/// Projection onto `{x : A x = b}`: `x - A^T z` with `A A^T z = A x - b`.
/// One refinement pass is applied to the residual.
pub fn affine_project(x: &Mat, set: &AffineSet) -> Result<Mat> {
    if x.shape() != (set.dim(), 1) {
        return Err(Error::invalid(format!(
            "affine_project: expected a {}x1 point, got {}x{}",
            set.dim(),
            x.nrows(),
            x.ncols()
        )));
    }
    let mut out = x.clone();
    for _ in 0..2 {
        let r = &set.a * &out - &set.b;
        let z = set.gram.solve(&r)?;
        out -= set.a.transpose() * z;
    }
    Ok(out)
}
