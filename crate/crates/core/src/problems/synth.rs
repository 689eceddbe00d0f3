//! Seeded synthetic instances.
//!
//! All generators draw from `Xoshiro256PlusPlus` seeded through
//! `SeedableRng::seed_from_u64`, with Gaussian entries from
//! `rand_distr::StandardNormal`. Both are fixed, platform-independent
//! algorithms, so a seed determines the instance bit for bit.

use alloc::format;
use alloc::vec::Vec;

use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::ObservedEntries;
use crate::linalg::{self, SpdFactor};
use crate::math;
use crate::{Error, Mat, Result};

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn gaussian(rng: &mut Xoshiro256PlusPlus, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `count` distinct indices from `0..total`, in draw order (partial
/// Fisher-Yates).
fn sample_indices(rng: &mut Xoshiro256PlusPlus, total: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.random_range(i..total);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

fn check_dims(rows: usize, cols: usize, rank: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "synthetic: empty shape {rows}x{cols}"
        )));
    }
    if rank > rows.min(cols) {
        return Err(Error::invalid(format!(
            "synthetic: rank {rank} exceeds min({rows}, {cols})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowRankSparse {
    pub m: Mat,
    pub w_true: Mat,
    pub s_true: Mat,
}

/// `M = U V^T + S` with Gaussian `n1 x r` and `n2 x r` factors and
/// `round(p n1 n2)` corrupted entries uniform in `[-5, 5]`.
pub fn synth_lowrank_sparse(
    n1: usize,
    n2: usize,
    rank: usize,
    p: f64,
    seed: u64,
) -> Result<LowRankSparse> {
    check_dims(n1, n2, rank)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "synthetic: corruption fraction {p} outside [0, 1)"
        )));
    }
    let mut rng = rng(seed);
    let u = gaussian(&mut rng, n1, rank);
    let v = gaussian(&mut rng, n2, rank);
    let w_true = &u * v.transpose();
    let total = n1 * n2;
    let count = math::round(p * total as f64) as usize;
    let mut s_true = Mat::zeros(n1, n2);
    for idx in sample_indices(&mut rng, total, count) {
        let val: f64 = rng.random_range(-5.0..=5.0);
        s_true[(idx % n1, idx / n1)] = val;
    }
    let m = &w_true + &s_true;
    Ok(LowRankSparse { m, w_true, s_true })
}

/// Rank-`r` Gaussian-factor `m x n` matrix and `max(1, round(q m n))`
/// observed positions drawn uniformly without replacement.
pub fn synth_completion(
    m: usize,
    n: usize,
    rank: usize,
    q: f64,
    seed: u64,
) -> Result<(Mat, ObservedEntries)> {
    check_dims(m, n, rank)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::invalid(format!(
            "synthetic: observed fraction {q} outside (0, 1]"
        )));
    }
    let mut rng = rng(seed);
    let u = gaussian(&mut rng, m, rank);
    let v = gaussian(&mut rng, n, rank);
    let full = &u * v.transpose();
    let total = m * n;
    let count = (math::round(q * total as f64) as usize).clamp(1, total);
    let positions: Vec<(usize, usize)> = sample_indices(&mut rng, total, count)
        .into_iter()
        .map(|idx| (idx % m, idx / m))
        .collect();
    let observed = ObservedEntries::from_matrix(&full, &positions)?;
    Ok((full, observed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsePrecision {
    /// Sample covariance of `10 n` draws from `N(0, precision^{-1})`.
    pub sigma: Mat,
    pub precision: Mat,
}

/// Sparse, diagonally dominant precision matrix (each off-diagonal pair
/// present with probability `density`, magnitude in `[0.2, 0.6]`, random
/// sign) and the sample covariance of `10 n` Gaussian draws from its
/// inverse.
pub fn synth_sparse_precision(n: usize, density: f64, seed: u64) -> Result<SparsePrecision> {
    if n == 0 {
        return Err(Error::invalid("synthetic: n must be positive"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::invalid(format!(
            "synthetic: density {density} outside [0, 1]"
        )));
    }
    let mut rng = rng(seed);
    let mut precision = Mat::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let keep: f64 = rng.random();
            if keep < density {
                let mag: f64 = rng.random_range(0.2..=0.6);
                let val = if rng.random::<bool>() { mag } else { -mag };
                precision[(i, j)] = val;
                precision[(j, i)] = val;
            }
        }
    }
    for i in 0..n {
        let off: f64 = precision.row(i).iter().map(|v| v.abs()).sum();
        precision[(i, i)] = off + 1.0;
    }
    let factor = SpdFactor::new(&precision)?;
    let samples = 10 * n;
    let z = gaussian(&mut rng, n, samples);
    // x = L^{-T} z has covariance (L L^T)^{-1}
    let x = factor
        .lower()
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::numerical("synthetic: triangular solve failed"))?;
    let mut sigma = &x * x.transpose() / samples as f64;
    linalg::symmetrize_in_place(&mut sigma);
    Ok(SparsePrecision { sigma, precision })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRecovery {
    pub a: Mat,
    pub b: Mat,
    pub x_true: Mat,
}

/// Gaussian `m x d` sensing matrix scaled by `1/sqrt(m)`, a `k`-sparse
/// Gaussian signal and `b = A x`.
pub fn synth_sparse_recovery(m: usize, d: usize, k: usize, seed: u64) -> Result<SparseRecovery> {
    if m == 0 || m > d || k > d {
        return Err(Error::invalid(format!(
            "synthetic: need 1 <= m <= d and k <= d (m = {m}, d = {d}, k = {k})"
        )));
    }
    let mut rng = rng(seed);
    let a = gaussian(&mut rng, m, d) / math::sqrt(m as f64);
    let mut x_true = Mat::zeros(d, 1);
    for idx in sample_indices(&mut rng, d, k) {
        x_true[idx] = StandardNormal.sample(&mut rng);
    }
    let b = &a * &x_true;
    Ok(SparseRecovery { a, b, x_true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowrank_without_corruption() {
        let inst = synth_lowrank_sparse(12, 9, 3, 0.0, 7).unwrap();
        assert_eq!(inst.m, inst.w_true);
        assert!(inst.s_true.iter().all(|&v| v == 0.0));
        let s = linalg::thin_svd(&inst.m).unwrap().s;
        let nonzero = s.iter().filter(|&&v| v > 1e-10 * s[0]).count();
        assert_eq!(nonzero, 3);
    }

    #[test]
    fn corruption_count_and_range() {
        let inst = synth_lowrank_sparse(20, 20, 2, 0.05, 3).unwrap();
        let nz: Vec<f64> = inst.s_true.iter().copied().filter(|&v| v != 0.0).collect();
        assert_eq!(nz.len(), 20);
        assert!(nz.iter().all(|v| v.abs() <= 5.0));
    }

    #[test]
    fn seeded_determinism() {
        assert_eq!(
            synth_lowrank_sparse(8, 6, 2, 0.1, 42).unwrap(),
            synth_lowrank_sparse(8, 6, 2, 0.1, 42).unwrap()
        );
        assert_ne!(
            synth_lowrank_sparse(8, 6, 2, 0.1, 42).unwrap(),
            synth_lowrank_sparse(8, 6, 2, 0.1, 43).unwrap()
        );
        assert_eq!(
            synth_completion(5, 4, 1, 0.5, 1).unwrap(),
            synth_completion(5, 4, 1, 0.5, 1).unwrap()
        );
        assert_eq!(
            synth_sparse_precision(6, 0.3, 9).unwrap(),
            synth_sparse_precision(6, 0.3, 9).unwrap()
        );
        assert_eq!(
            synth_sparse_recovery(4, 10, 2, 5).unwrap(),
            synth_sparse_recovery(4, 10, 2, 5).unwrap()
        );
    }

    #[test]
    fn full_observation() {
        let (full, obs) = synth_completion(4, 3, 2, 1.0, 2).unwrap();
        assert_eq!(obs.len(), 12);
        assert_eq!(obs.to_dense(), full);
    }

    #[test]
    fn covariance_is_psd() {
        let inst = synth_sparse_precision(30, 0.1, 4).unwrap();
        let min = *linalg::sym_eig(&inst.sigma).unwrap().values.last().unwrap();
        assert!(min >= -1e-10);
        assert_eq!(linalg::asymmetry(&inst.sigma), 0.0);
    }

    #[test]
    fn recovery_instance() {
        let inst = synth_sparse_recovery(20, 100, 5, 1).unwrap();
        assert_eq!(inst.x_true.iter().filter(|&&v| v != 0.0).count(), 5);
        assert!((&inst.a * &inst.x_true - &inst.b).amax() == 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(synth_lowrank_sparse(3, 3, 4, 0.0, 1).is_err());
        assert!(synth_lowrank_sparse(3, 3, 1, 1.0, 1).is_err());
        assert!(synth_completion(3, 3, 1, 0.0, 1).is_err());
        assert!(synth_sparse_precision(0, 0.1, 1).is_err());
        assert!(synth_sparse_recovery(5, 4, 1, 1).is_err());
    }
}
