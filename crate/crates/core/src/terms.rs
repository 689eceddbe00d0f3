//! Concrete smooth, Lipschitz and simple terms.

use alloc::format;

use crate::linalg;
use crate::math;
use crate::prox::{self, AffineSet, SYMMETRY_TOL};
use crate::smoothing::LipschitzTerm;
use crate::solver::{ProxWorkspace, SimpleTerm, SmoothTerm};
use crate::{Error, Mat, Result};

// ---- smooth terms ----

/// `f = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSmooth;

impl SmoothTerm for ZeroSmooth {
    fn value(&self, _: &Mat) -> f64 {
        0.0
    }
    fn gradient(&self, x: &Mat) -> Mat {
        Mat::zeros(x.nrows(), x.ncols())
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
}

/// `f(x) = <c, x>`.
#[derive(Debug, Clone)]
pub struct LinearTerm {
    pub c: Mat,
}

impl SmoothTerm for LinearTerm {
    fn value(&self, x: &Mat) -> f64 {
        self.c.dot(x)
    }
    fn gradient(&self, _: &Mat) -> Mat {
        self.c.clone()
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
}

/// Smooth term from a value closure, a gradient closure and a declared
/// gradient Lipschitz constant.
pub struct SmoothFn<V, G> {
    value: V,
    gradient: G,
    lipschitz: f64,
}

impl<V, G> SmoothFn<V, G>
where
    V: Fn(&Mat) -> f64 + Send + Sync,
    G: Fn(&Mat) -> Mat + Send + Sync,
{
    pub fn new(value: V, gradient: G, lipschitz: f64) -> Self {
        SmoothFn {
            value,
            gradient,
            lipschitz,
        }
    }
}

impl<V, G> SmoothTerm for SmoothFn<V, G>
where
    V: Fn(&Mat) -> f64 + Send + Sync,
    G: Fn(&Mat) -> Mat + Send + Sync,
{
    fn value(&self, x: &Mat) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &Mat) -> Mat {
        (self.gradient)(x)
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

// ---- Lipschitz terms ----

/// `g = 0`, with identity prox and `rho = 0`. Makes the iteration a plain
/// accelerated proximal gradient method.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroLipschitz;

impl LipschitzTerm for ZeroLipschitz {
    fn value(&self, _: &Mat) -> f64 {
        0.0
    }
    fn prox(&self, x: &Mat, _: f64) -> Result<Mat> {
        Ok(x.clone())
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
}

/// `g(x) = scale * |x|_1` on a space of `dim` entries, `rho = scale sqrt(dim)`.
#[derive(Debug, Clone, Copy)]
pub struct L1Norm {
    pub scale: f64,
    rho: f64,
}

impl L1Norm {
    pub fn new(scale: f64, dim: usize) -> Self {
        L1Norm {
            scale,
            rho: scale * math::sqrt(dim as f64),
        }
    }
}

impl LipschitzTerm for L1Norm {
    fn value(&self, x: &Mat) -> f64 {
        self.scale * x.iter().map(|v| v.abs()).sum::<f64>()
    }
    fn prox(&self, x: &Mat, alpha: f64) -> Result<Mat> {
        prox::soft_threshold(x, alpha * self.scale)
    }
    fn lipschitz(&self) -> f64 {
        self.rho
    }
}

/// `g(X) = lambda * max_i X_ii`, `rho = lambda`.
#[derive(Debug, Clone, Copy)]
pub struct MaxDiag {
    pub lambda: f64,
}

impl LipschitzTerm for MaxDiag {
    fn value(&self, x: &Mat) -> f64 {
        let m = x
            .diagonal()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        self.lambda * m
    }
    fn prox(&self, x: &Mat, alpha: f64) -> Result<Mat> {
        prox::max_diag_prox(x, alpha, self.lambda)
    }
    fn lipschitz(&self) -> f64 {
        self.lambda
    }
}

/// `g(W) = lambda * |M - W|_1`, `rho = lambda sqrt(entries of M)`.
#[derive(Debug, Clone)]
pub struct L1Residual {
    pub lambda: f64,
    pub data: Mat,
}

impl LipschitzTerm for L1Residual {
    fn value(&self, w: &Mat) -> f64 {
        self.lambda * self.data.zip_fold(w, 0.0, |acc, m, x| acc + (m - x).abs())
    }
    fn prox(&self, w: &Mat, alpha: f64) -> Result<Mat> {
        prox::l1_residual_prox(w, alpha, self.lambda, &self.data)
    }
    fn lipschitz(&self) -> f64 {
        self.lambda * math::sqrt(self.data.len() as f64)
    }
}

// ---- simple terms ----

/// `h = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSimple;

impl SimpleTerm for ZeroSimple {
    fn value(&self, _: &Mat) -> f64 {
        0.0
    }
    fn prox(&self, x: &Mat, _: f64, _: &mut ProxWorkspace) -> Result<Mat> {
        Ok(x.clone())
    }
}

/// Indicator of the positive semidefinite cone.
///
/// With `adaptive` set, each projection asks the eigensolver for only the
/// top `previous rank + 1` pairs (see [`prox::psd_project`]).
#[derive(Debug, Clone, Copy)]
pub struct PsdCone {
    pub adaptive: bool,
    /// Eigenvalues down to `-tol * max(1, |X|_max)` count as nonnegative.
    pub tol: f64,
}

impl Default for PsdCone {
    fn default() -> Self {
        PsdCone {
            adaptive: true,
            tol: 1e-8,
        }
    }
}

impl SimpleTerm for PsdCone {
    fn value(&self, x: &Mat) -> f64 {
        if x.nrows() != x.ncols() {
            return f64::INFINITY;
        }
        let scale = x.amax().max(1.0);
        if linalg::asymmetry(x) > SYMMETRY_TOL * scale {
            return f64::INFINITY;
        }
        match linalg::sym_eig(x) {
            Ok(e) if e.values.last().is_some_and(|&v| v >= -self.tol * scale) => 0.0,
            _ => f64::INFINITY,
        }
    }

    fn prox(&self, x: &Mat, _: f64, ws: &mut ProxWorkspace) -> Result<Mat> {
        let hint = if self.adaptive { ws.last_rank } else { None };
        let p = prox::psd_project(x, hint)?;
        ws.last_rank = Some(p.rank);
        ws.last_pairs_computed = Some(p.eigenpairs_computed);
        Ok(p.matrix)
    }
}

/// `h(W) = scale * |W|_tr`.
#[derive(Debug, Clone, Copy)]
pub struct TraceNorm {
    pub scale: f64,
}

impl Default for TraceNorm {
    fn default() -> Self {
        TraceNorm { scale: 1.0 }
    }
}

impl SimpleTerm for TraceNorm {
    fn value(&self, x: &Mat) -> f64 {
        match linalg::thin_svd(x) {
            Ok(svd) => self.scale * svd.s.iter().sum::<f64>(),
            Err(_) => f64::NAN,
        }
    }

    fn prox(&self, x: &Mat, alpha: f64, ws: &mut ProxWorkspace) -> Result<Mat> {
        let (out, rank) = prox::svt(x, alpha * self.scale)?;
        ws.last_rank = Some(rank);
        ws.last_pairs_computed = Some(x.nrows().min(x.ncols()));
        Ok(out)
    }
}

/// `h(X) = -log det X` on positive definite `X`, `+inf` elsewhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogDetBarrier;

impl SimpleTerm for LogDetBarrier {
    fn value(&self, x: &Mat) -> f64 {
        if x.nrows() != x.ncols() || linalg::asymmetry(x) > SYMMETRY_TOL * x.amax().max(1.0) {
            return f64::INFINITY;
        }
        match linalg::sym_eig(x) {
            Ok(e) if e.values.iter().all(|&v| v > 0.0) => {
                -e.values.iter().map(|&v| math::ln(v)).sum::<f64>()
            }
            _ => f64::INFINITY,
        }
    }

    fn prox(&self, x: &Mat, alpha: f64, _: &mut ProxWorkspace) -> Result<Mat> {
        prox::logdet_prox(x, alpha)
    }
}

/// Indicator of `{x : A x = b}`.
#[derive(Debug, Clone)]
pub struct AffineIndicator {
    pub set: AffineSet,
    /// Feasibility tolerance relative to `1 + |b|`.
    pub tol: f64,
}

impl AffineIndicator {
    pub fn new(set: AffineSet) -> Self {
        AffineIndicator { set, tol: 1e-8 }
    }
}

impl SimpleTerm for AffineIndicator {
    fn value(&self, x: &Mat) -> f64 {
        if x.shape() == (self.set.dim(), 1) && self.set.contains(x, self.tol) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, x: &Mat, _: f64, _: &mut ProxWorkspace) -> Result<Mat> {
        prox::affine_project(x, &self.set)
    }
}

pub(crate) fn require_positive(v: f64, name: &str) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let x = Mat::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 5.0]);
        assert_eq!(L1Norm::new(0.5, 4).value(&x), 5.0);
        assert_eq!(L1Norm::new(0.5, 4).lipschitz(), 1.0);
        assert_eq!(MaxDiag { lambda: 2.0 }.value(&x), 10.0);
        let r = L1Residual {
            lambda: 0.1,
            data: Mat::zeros(2, 2),
        };
        assert!((r.value(&x) - 1.0).abs() < 1e-15);
        assert!((r.lipschitz() - 0.2).abs() < 1e-15);
        // eigenvalues of x: 3 +- sqrt(8), both positive
        assert_eq!(PsdCone::default().value(&x), 0.0);
        assert!((LogDetBarrier.value(&x) + 0.0).abs() < 1e-12);
        let neg = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(PsdCone::default().value(&neg), f64::INFINITY);
        assert_eq!(LogDetBarrier.value(&neg), f64::INFINITY);
        assert!((TraceNorm::default().value(&neg) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_prox_records_rank() {
        let mut ws = ProxWorkspace::default();
        let x = Mat::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        TraceNorm::default().prox(&x, 2.0, &mut ws).unwrap();
        assert_eq!(ws.last_rank, Some(1));
    }
}
