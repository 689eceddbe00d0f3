//! Ready-made formulations: max-norm matrix completion (through its PSD
//! lift), robust PCA, sparse inverse covariance selection and basis
//! pursuit, each with a default for the dynamic schedule's `a`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::linalg;
use crate::math;
use crate::prox::AffineSet;
use crate::solver::{CompositeProblem, SmoothTerm};
use crate::terms::{
    require_positive, AffineIndicator, L1Norm, L1Residual, LinearTerm, LogDetBarrier, MaxDiag,
    PsdCone, TraceNorm, ZeroSmooth,
};
use crate::{Error, Mat, Result};

pub mod synth;

/// A problem plus the default `a` for `BetaSchedule::Dynamic`.
#[derive(Debug)]
pub struct ProblemInstance {
    pub problem: CompositeProblem,
    pub default_a: f64,
}

/// Observed entries `(row, col, value)` of an `rows x cols` matrix,
/// 0-based, sorted by `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedEntries {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl ObservedEntries {
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("observed entries: empty set"));
        }
        if let Some(&(i, j, _)) = entries.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::invalid(format!(
                "observed entries: index ({i}, {j}) outside {rows}x{cols}"
            )));
        }
        if let Some(&(i, j, v)) = entries.iter().find(|e| !e.2.is_finite()) {
            return Err(Error::invalid(format!(
                "observed entries: non-finite value {v} at ({i}, {j})"
            )));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::invalid(format!(
                "observed entries: duplicate index ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(ObservedEntries {
            rows,
            cols,
            entries,
        })
    }

    /// Entries of `m` at the given positions.
    pub fn from_matrix(m: &Mat, positions: &[(usize, usize)]) -> Result<Self> {
        let (rows, cols) = m.shape();
        let entries = positions
            .iter()
            .map(|&(i, j)| {
                if i < rows && j < cols {
                    Ok((i, j, m[(i, j)]))
                } else {
                    Err(Error::invalid(format!(
                        "observed entries: index ({i}, {j}) outside {rows}x{cols}"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ObservedEntries::new(rows, cols, entries)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// `|P_Omega(M)|_F`.
    pub fn norm(&self) -> f64 {
        math::sqrt(self.entries.iter().map(|e| e.2 * e.2).sum::<f64>())
    }

    /// `P_Omega(M)` as a dense matrix.
    pub fn to_dense(&self) -> Mat {
        let mut out = Mat::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            out[(i, j)] = v;
        }
        out
    }
}

/// Block layout of the symmetric lift `Y = [A X; X^T B]` with `A` of size
/// `m x m`, `B` of size `n x n` and the completion `X` of size `m x n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxNormLift {
    pub m: usize,
    pub n: usize,
}

impl MaxNormLift {
    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn x_block(&self, y: &Mat) -> Mat {
        y.view((0, self.m), (self.m, self.n)).into_owned()
    }

    pub fn a_block(&self, y: &Mat) -> Mat {
        y.view((0, 0), (self.m, self.m)).into_owned()
    }

    pub fn b_block(&self, y: &Mat) -> Mat {
        y.view((self.m, self.m), (self.n, self.n)).into_owned()
    }

    pub fn assemble(&self, a: &Mat, x: &Mat, b: &Mat) -> Result<Mat> {
        let (m, n) = (self.m, self.n);
        if a.shape() != (m, m) || x.shape() != (m, n) || b.shape() != (n, n) {
            return Err(Error::invalid("max-norm lift: block shapes do not match"));
        }
        let mut y = Mat::zeros(m + n, m + n);
        y.view_mut((0, 0), (m, m)).copy_from(a);
        y.view_mut((m, m), (n, n)).copy_from(b);
        y.view_mut((0, m), (m, n)).copy_from(x);
        y.view_mut((m, 0), (n, m)).copy_from(&x.transpose());
        Ok(y)
    }
}

/// `f(Y) = |P_Omega(X) - P_Omega(M)|_F^2` read from the lift, with `X` taken
/// as the average of the upper-right block and the transposed lower-left
/// block so the gradient stays symmetric.
#[derive(Debug, Clone)]
pub struct CompletionLoss {
    lift: MaxNormLift,
    observed: ObservedEntries,
}

impl CompletionLoss {
    fn residual(&self, y: &Mat, i: usize, j: usize, v: f64) -> f64 {
        let m = self.lift.m;
        0.5 * (y[(i, m + j)] + y[(m + j, i)]) - v
    }
}

impl SmoothTerm for CompletionLoss {
    fn value(&self, y: &Mat) -> f64 {
        self.observed
            .entries()
            .iter()
            .map(|&(i, j, v)| {
                let r = self.residual(y, i, j, v);
                r * r
            })
            .sum()
    }

    fn gradient(&self, y: &Mat) -> Mat {
        let m = self.lift.m;
        let mut g = Mat::zeros(y.nrows(), y.ncols());
        for &(i, j, v) in self.observed.entries() {
            let r = self.residual(y, i, j, v);
            g[(i, m + j)] = r;
            g[(m + j, i)] = r;
        }
        g
    }

    fn lipschitz(&self) -> f64 {
        2.0
    }
}

/// `min lambda max diag(Y) + |P_Omega(X) - P_Omega(M)|_F^2 + indicator(Y PSD)`
/// over the lift `Y = [A X; X^T B]`, starting from `Y = 0`.
///
/// Default `a = lambda sqrt(|Omega|) / ((m + n) |P_Omega(M)|_F)`.
pub fn make_maxnorm_completion(
    observed: &ObservedEntries,
    lambda: f64,
) -> Result<(ProblemInstance, MaxNormLift)> {
    require_positive(lambda, "lambda")?;
    let norm = observed.norm();
    if norm == 0.0 {
        return Err(Error::invalid(
            "max-norm completion: observed entries are all zero, default a is undefined",
        ));
    }
    let (m, n) = observed.shape();
    let lift = MaxNormLift { m, n };
    let f = CompletionLoss {
        lift,
        observed: observed.clone(),
    };
    let problem = CompositeProblem::new(
        Box::new(f),
        Box::new(MaxDiag { lambda }),
        Box::new(PsdCone::default()),
        Mat::zeros(lift.dim(), lift.dim()),
    )?;
    let default_a = lambda * math::sqrt(observed.len() as f64) / (lift.dim() as f64 * norm);
    Ok((ProblemInstance { problem, default_a }, lift))
}

/// `min |W|_tr + lambda |M - W|_1` (`f = 0`), starting from `W = 0`.
///
/// Default `a = lambda sqrt(n1 n2) / |M|_F`.
pub fn make_rpca(m: &Mat, lambda: f64) -> Result<ProblemInstance> {
    require_positive(lambda, "lambda")?;
    linalg::check_finite(m, "rpca data")?;
    let norm = m.norm();
    if norm == 0.0 {
        return Err(Error::invalid(
            "rpca: data matrix is zero, default a is undefined",
        ));
    }
    let (n1, n2) = m.shape();
    let problem = CompositeProblem::new(
        Box::new(ZeroSmooth),
        Box::new(L1Residual {
            lambda,
            data: m.clone(),
        }),
        Box::new(TraceNorm::default()),
        Mat::zeros(n1, n2),
    )?;
    let default_a = lambda * math::sqrt((n1 * n2) as f64) / norm;
    Ok(ProblemInstance { problem, default_a })
}

/// `min -log det X + <Sigma, X> + lambda |X|_1` over positive definite `X`,
/// starting from `X = I / (1 + lambda)`.
///
/// `rho_g = lambda n`; default `a = lambda (1 + lambda) sqrt(n)`.
pub fn make_sics(sigma: &Mat, lambda: f64) -> Result<ProblemInstance> {
    require_positive(lambda, "lambda")?;
    linalg::check_square(sigma, "sics covariance")?;
    linalg::check_finite(sigma, "sics covariance")?;
    let scale = sigma.amax().max(1.0);
    let asym = linalg::asymmetry(sigma);
    if asym > 1e-10 * scale {
        return Err(Error::invalid(format!(
            "sics: covariance is not symmetric (max |s_ij - s_ji| = {asym:e})"
        )));
    }
    let min_eig = *linalg::sym_eig(sigma)?.values.last().unwrap_or(&0.0);
    if min_eig < -1e-10 * scale {
        return Err(Error::invalid(format!(
            "sics: covariance is not positive semidefinite (min eigenvalue {min_eig:e})"
        )));
    }
    let n = sigma.nrows();
    let problem = CompositeProblem::new(
        Box::new(LinearTerm {
            c: linalg::symmetrized(sigma),
        }),
        Box::new(L1Norm::new(lambda, n * n)),
        Box::new(LogDetBarrier),
        Mat::identity(n, n) / (1.0 + lambda),
    )?;
    let default_a = lambda * (1.0 + lambda) * math::sqrt(n as f64);
    Ok(ProblemInstance { problem, default_a })
}

/// `min |x|_1` subject to `A x = b`, starting from the minimum-norm
/// feasible point `x_1 = A^T (A A^T)^{-1} b`.
///
/// `rho_g = sqrt(d)`; default `a = sqrt(d) / |x_1|` (or `sqrt(d)` when
/// `b = 0`), i.e. `rho_g` over an estimate of the solution norm.
pub fn make_basis_pursuit(a: &Mat, b: &Mat) -> Result<ProblemInstance> {
    let set = AffineSet::new(a.clone(), b.clone())?;
    let x1 = set.min_norm_point()?;
    let d = a.ncols();
    let rho = math::sqrt(d as f64);
    let x1_norm = x1.norm();
    let default_a = if x1_norm > 0.0 { rho / x1_norm } else { rho };
    let problem = CompositeProblem::new(
        Box::new(ZeroSmooth),
        Box::new(L1Norm::new(1.0, d)),
        Box::new(AffineIndicator::new(set)),
        x1,
    )?;
    Ok(ProblemInstance { problem, default_a })
}
