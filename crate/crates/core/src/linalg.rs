//! Dense kernels used by the proximity operators: symmetric eigendecomposition
//! (full and top-`c`), thin SVD, and Cholesky solves for small SPD systems.
//!
//! Decompositions are delegated to `nalgebra`; this module fixes the ordering
//! conventions, input checks and error reporting the rest of the crate
//! relies on.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DVector, SymmetricEigen, SVD};

use crate::math;
use crate::{Error, Mat, Result};

const SVD_MAX_ITER: usize = 10_000;

/// Eigenpairs of a symmetric matrix, values in descending order.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `n x c`, column `i` belongs to `values[i]`.
    pub vectors: Mat,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `V diag(map(values)) V^T`, skipping pairs whose mapped value is zero.
    pub fn reconstruct_with(&self, mut map: impl FnMut(f64) -> f64) -> Mat {
        let n = self.vectors.nrows();
        let mut out = Mat::zeros(n, n);
        for (i, &lam) in self.values.iter().enumerate() {
            let w = map(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(i);
            out.ger(w, &v, &v, 1.0);
        }
        symmetrize_in_place(&mut out);
        out
    }
}

/// Thin singular value decomposition `U diag(s) V^T` with `r = min(m, n)`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

impl ThinSvd {
    pub fn reconstruct_with(&self, mut map: impl FnMut(f64) -> f64) -> Mat {
        let mut out = Mat::zeros(self.u.nrows(), self.v.nrows());
        for (i, &s) in self.s.iter().enumerate() {
            let w = map(s);
            if w == 0.0 {
                continue;
            }
            out.ger(w, &self.u.column(i), &self.v.column(i), 1.0);
        }
        out
    }
}

pub(crate) fn check_finite(m: &Mat, what: &str) -> Result<()> {
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return Err(Error::invalid(format!(
            "{what}: non-finite entry at ({r}, {c})"
        )));
    }
    Ok(())
}

pub(crate) fn check_square(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid(format!(
            "{what}: expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::invalid(format!("{what}: empty matrix")));
    }
    Ok(())
}

/// Largest `|m_ij - m_ji|`.
pub fn asymmetry(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Replace `m` by `(m + m^T) / 2`.
pub fn symmetrize_in_place(m: &mut Mat) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub fn symmetrized(m: &Mat) -> Mat {
    let mut s = m.clone();
    symmetrize_in_place(&mut s);
    s
}

/// Full eigendecomposition of the symmetric part of `m`.
pub fn sym_eig(m: &Mat) -> Result<EigenPairs> {
    check_square(m, "sym_eig")?;
    check_finite(m, "sym_eig")?;
    let eig = SymmetricEigen::new(symmetrized(m));
    Ok(sorted_pairs(eig.eigenvalues, eig.eigenvectors, m.nrows()))
}

/// The `c` algebraically largest eigenpairs.
///
/// Currently computed from the full decomposition and truncated; callers
/// must not assume anything about the cost beyond `O(n^3)`.
pub fn partial_sym_eig(m: &Mat, c: usize) -> Result<EigenPairs> {
    check_square(m, "partial_sym_eig")?;
    let n = m.nrows();
    if c == 0 || c > n {
        return Err(Error::invalid(format!(
            "partial_sym_eig: count {c} outside 1..={n}"
        )));
    }
    let full = sym_eig(m)?;
    Ok(EigenPairs {
        values: full.values[..c].to_vec(),
        vectors: full.vectors.columns(0, c).into_owned(),
    })
}

fn sorted_pairs(values: DVector<f64>, vectors: Mat, c: usize) -> EigenPairs {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: ties keep the factorization's order
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order.truncate(c);
    let n = vectors.nrows();
    let mut out = Mat::zeros(n, order.len());
    for (dst, &src) in order.iter().enumerate() {
        out.set_column(dst, &vectors.column(src));
    }
    EigenPairs {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: out,
    }
}

/// Thin SVD with singular values sorted in descending order.
pub fn thin_svd(m: &Mat) -> Result<ThinSvd> {
    check_finite(m, "thin_svd")?;
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Err(Error::invalid("thin_svd: empty matrix"));
    }
    let svd = SVD::try_new_unordered(m.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::numerical("thin_svd: iteration did not converge"))?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::numerical("thin_svd: singular vectors missing")),
    };
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut uo = Mat::zeros(rows, r);
    let mut vo = Mat::zeros(cols, r);
    let mut s = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        uo.set_column(dst, &u.column(src));
        vo.set_column(dst, &v_t.row(src).transpose());
        s.push(svd.singular_values[src].max(0.0));
    }
    Ok(ThinSvd { u: uo, s, v: vo })
}

/// Lower-triangular Cholesky factor `G = L L^T` of an SPD matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    lower: Mat,
}

impl SpdFactor {
    pub fn new(g: &Mat) -> Result<Self> {
        check_square(g, "spd factorization")?;
        check_finite(g, "spd factorization")?;
        let n = g.nrows();
        let tol = 1e-10 * g.norm();
        if asymmetry(g) > tol.max(f64::MIN_POSITIVE) {
            return Err(Error::invalid("spd factorization: matrix is not symmetric"));
        }
        let mut l = Mat::zeros(n, n);
        for j in 0..n {
            let mut d = g[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            // relative pivot test catches numerically rank-deficient Gram matrices
            if !(d > 1e-14 * g[(j, j)].abs().max(f64::MIN_POSITIVE)) {
                return Err(Error::numerical(format!(
                    "Cholesky failed at pivot {j}: remaining diagonal {d:e} (matrix singular or indefinite)"
                )));
            }
            let djj = math::sqrt(d);
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(SpdFactor { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &Mat {
        &self.lower
    }

    /// Solve `G z = r` for each column of `r`.
    pub fn solve(&self, r: &Mat) -> Result<Mat> {
        let n = self.dim();
        if r.nrows() != n {
            return Err(Error::invalid(format!(
                "spd solve: right-hand side has {} rows, expected {n}",
                r.nrows()
            )));
        }
        let l = &self.lower;
        let mut z = r.clone();
        for col in 0..z.ncols() {
            for i in 0..n {
                let mut s = z[(i, col)];
                for k in 0..i {
                    s -= l[(i, k)] * z[(k, col)];
                }
                z[(i, col)] = s / l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut s = z[(i, col)];
                for k in (i + 1)..n {
                    s -= l[(k, i)] * z[(k, col)];
                }
                z[(i, col)] = s / l[(i, i)];
            }
        }
        Ok(z)
    }
}

/// One-shot `G z = r` for SPD `G`.
pub fn spd_solve(g: &Mat, r: &Mat) -> Result<Mat> {
    SpdFactor::new(g)?.solve(r)
}
