//! Slow, independent oracles for checking the solver crate.
//!
//! Nothing here calls the production prox operators except
//! [`reference_optimum`], whose cross-check only needs `prox_h` and a
//! subgradient of `g`.

use std::fmt;

pub mod phi;

use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use smoothprox_core::{
    objective, solve, BetaSchedule, CompositeProblem, Mat, ProxWorkspace, SolveOptions,
};

/// Largest dimension [`prox_oracle`] accepts.
pub const MAX_ORACLE_DIM: usize = 5;

const GRID_POINTS: usize = 21;
const MIN_STEP: f64 = 1e-7;
const RANDOM_DIRECTIONS: usize = 1 << 15;
/// Bisection steps when pulling a trial point back into the domain.
const PULL_BACK_STEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    DimensionTooLarge(usize),
    /// `F` was not finite at `x +- step e_i`.
    NonFinite {
        coordinate: usize,
    },
    NoFinitePoint,
    BadInput(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::DimensionTooLarge(n) => {
                write!(
                    f,
                    "oracle dimension {n} exceeds the limit of {MAX_ORACLE_DIM}"
                )
            }
            OracleError::NonFinite { coordinate } => {
                write!(
                    f,
                    "function is not finite at the probe points of coordinate {coordinate}"
                )
            }
            OracleError::NoFinitePoint => write!(f, "no grid point has a finite objective"),
            OracleError::BadInput(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for OracleError {}

/// `|x - u|^2 / (2 alpha) + phi(u)`.
pub fn prox_objective(phi: &dyn Fn(&[f64]) -> f64, x: &[f64], alpha: f64, u: &[f64]) -> f64 {
    let d2: f64 = x.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum();
    d2 / (2.0 * alpha) + phi(u)
}

/// Brute-force minimizer of `|x - u|^2 / (2 alpha) + phi(u)`.
///
/// A 21-point-per-axis grid over the box of half-width `|x| + alpha rho + 1`
/// centred at `x` seeds a pattern search. Each round tries every direction
/// in `{-1, 0, 1}^n`; when none improves it draws random unit directions
/// until one does, and halves the step only after a large budget of them
/// fails. The random directions let the search slide along kinks.
///
/// A trial point outside the domain of `phi` is pulled back along the
/// segment towards the centroid of the finite grid points (inside the domain
/// by convexity) until it sits on the boundary. Without that, a constrained
/// minimizer on a curved boundary is only located to about the square root
/// of the objective's precision.
pub fn prox_oracle(
    phi: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    alpha: f64,
    rho: f64,
) -> Result<Vec<f64>, OracleError> {
    let n = x.len();
    if n > MAX_ORACLE_DIM {
        return Err(OracleError::DimensionTooLarge(n));
    }
    if !(alpha > 0.0) || !(rho >= 0.0) || x.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::BadInput(format!(
            "prox_oracle: need finite x, alpha > 0, rho >= 0 (alpha = {alpha}, rho = {rho})"
        )));
    }
    let obj = |u: &[f64]| prox_objective(phi, x, alpha, u);
    if n == 0 {
        return Ok(Vec::new());
    }

    let radius = norm(x) + alpha * rho + 1.0;
    let spacing = 2.0 * radius / (GRID_POINTS - 1) as f64;
    let mut best = x.to_vec();
    let mut best_val = obj(&best);
    let mut idx = vec![0usize; n];
    let mut u = vec![0.0; n];
    let mut centroid = vec![0.0; n];
    let mut finite = 0usize;
    loop {
        for i in 0..n {
            u[i] = x[i] - radius + spacing * idx[i] as f64;
        }
        let v = obj(&u);
        if v.is_finite() {
            finite += 1;
            for (c, ui) in centroid.iter_mut().zip(&u) {
                *c += ui;
            }
        }
        if v < best_val {
            best_val = v;
            best.copy_from_slice(&u);
        }
        let mut i = 0;
        while i < n {
            idx[i] += 1;
            if idx[i] < GRID_POINTS {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    if !best_val.is_finite() {
        return Err(OracleError::NoFinitePoint);
    }

    for c in &mut centroid {
        *c /= finite as f64;
    }
    let anchor_val = obj(&centroid);

    let lattice = lattice_directions(n);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x5eed);
    let mut step = spacing;
    let mut trial = vec![0.0; n];
    // moves along d while it pays off; reports whether it moved at all
    let mut advance = |best: &mut Vec<f64>, best_val: &mut f64, d: &[f64], step: f64| {
        let mut moved = false;
        loop {
            for i in 0..n {
                trial[i] = best[i] + step * d[i];
            }
            let mut v = obj(&trial);
            if v == f64::INFINITY && anchor_val.is_finite() {
                v = pull_back(&obj, &centroid, &mut trial);
            }
            if v < *best_val {
                *best_val = v;
                best.copy_from_slice(&trial);
                moved = true;
            } else {
                return moved;
            }
        }
    };
    while step > MIN_STEP {
        let mut improved = false;
        for d in &lattice {
            improved |= advance(&mut best, &mut best_val, d, step);
        }
        if !improved {
            for _ in 0..RANDOM_DIRECTIONS {
                let d = random_unit(&mut rng, n);
                if advance(&mut best, &mut best_val, &d, step) {
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best)
}

/// Moves `trial` onto the last finite point of the segment from `anchor`
/// (finite) to `trial` (infinite) by bisection and returns its value.
fn pull_back(obj: &dyn Fn(&[f64]) -> f64, anchor: &[f64], trial: &mut [f64]) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let at = |s: f64| -> Vec<f64> {
        anchor
            .iter()
            .zip(trial.iter())
            .map(|(a, t)| a + s * (t - a))
            .collect()
    };
    for _ in 0..PULL_BACK_STEPS {
        let mid = 0.5 * (lo + hi);
        if obj(&at(mid)).is_finite() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = at(lo);
    trial.copy_from_slice(&p);
    obj(&p)
}

fn lattice_directions(n: usize) -> Vec<Vec<f64>> {
    let total = 3usize.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut c = code;
        let d: Vec<f64> = (0..n)
            .map(|_| {
                let digit = c % 3;
                c /= 3;
                digit as f64 - 1.0
            })
            .collect();
        let len = norm(&d);
        if len > 0.0 {
            out.push(d.iter().map(|v| v / len).collect());
        }
    }
    out
}

fn random_unit(rng: &mut Xoshiro256PlusPlus, n: usize) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let len = norm(&d);
        if len > 1e-3 && len <= 1.0 {
            return d.iter().map(|v| v / len).collect();
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Comparison of a candidate prox output against [`prox_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub x: Vec<f64>,
    pub alpha: f64,
    pub oracle_point: Vec<f64>,
    pub oracle_value: f64,
    pub candidate_point: Vec<f64>,
    pub candidate_value: f64,
    /// `|oracle_point - candidate_point|`.
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn compare(
        phi: &dyn Fn(&[f64]) -> f64,
        x: &[f64],
        alpha: f64,
        rho: f64,
        candidate: &[f64],
        tolerance: f64,
    ) -> Result<Self, OracleError> {
        if candidate.len() != x.len() {
            return Err(OracleError::BadInput(format!(
                "candidate has {} entries, x has {}",
                candidate.len(),
                x.len()
            )));
        }
        let oracle_point = prox_oracle(phi, x, alpha, rho)?;
        let diff: Vec<f64> = oracle_point
            .iter()
            .zip(candidate)
            .map(|(a, b)| a - b)
            .collect();
        Ok(OracleReport {
            x: x.to_vec(),
            alpha,
            oracle_value: prox_objective(phi, x, alpha, &oracle_point),
            candidate_value: prox_objective(phi, x, alpha, candidate),
            discrepancy: norm(&diff),
            oracle_point,
            candidate_point: candidate.to_vec(),
            tolerance,
        })
    }

    /// Points agree within tolerance and the oracle found nothing better
    /// than the candidate by more than the tolerance.
    pub fn passed(&self) -> bool {
        self.discrepancy <= self.tolerance
            && self.oracle_value >= self.candidate_value - self.tolerance
    }
}

/// Centered finite differences `(F(x + h e_i) - F(x - h e_i)) / (2h)`.
pub fn fd_gradient(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    step: f64,
) -> Result<Vec<f64>, OracleError> {
    if !(step > 0.0) {
        return Err(OracleError::BadInput(format!(
            "fd_gradient: step must be positive, got {step}"
        )));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = f(&probe);
        probe[i] = x[i] - step;
        let down = f(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(OracleError::NonFinite { coordinate: i });
        }
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// A high-accuracy solve and an independent subgradient estimate of `F*`.
#[derive(Debug, Clone)]
pub struct ReferenceOptimum {
    pub f_star: f64,
    pub x_star: Mat,
    pub iterations: usize,
    /// Best objective of the proximal subgradient run.
    pub subgradient_f: f64,
    /// `|f_star - subgradient_f| / max(1, |f_star|)`.
    pub disagreement: f64,
    /// Set when `disagreement` exceeds [`CROSS_CHECK_TOL`].
    pub flagged: bool,
}

pub const CROSS_CHECK_TOL: f64 = 1e-3;

impl ReferenceOptimum {
    /// `|x_1 - x*|`.
    pub fn distance_from(&self, x1: &Mat) -> f64 {
        (x1 - &self.x_star).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub subgradient_iter: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            max_iter: 200_000,
            rel_tol: 1e-10,
            subgradient_iter: 200_000,
        }
    }
}

pub fn reference_optimum(
    p: &CompositeProblem,
    schedule: &BetaSchedule,
) -> Result<ReferenceOptimum, smoothprox_core::Error> {
    reference_optimum_with(p, schedule, &ReferenceOptions::default())
}

pub fn reference_optimum_with(
    p: &CompositeProblem,
    schedule: &BetaSchedule,
    opts: &ReferenceOptions,
) -> Result<ReferenceOptimum, smoothprox_core::Error> {
    let sol = solve(
        p,
        schedule,
        &SolveOptions {
            max_iter: opts.max_iter,
            rel_tol: opts.rel_tol,
            trace_every: 100,
        },
    )?;
    // the best iterate is only tracked on recorded iterations
    let (x_star, f_star) = if sol.last_objective <= sol.best_objective {
        (sol.last.clone(), sol.last_objective)
    } else {
        (sol.x.clone(), sol.best_objective)
    };
    let subgradient_f = subgradient_run(p, &x_star, opts.subgradient_iter)?;
    let disagreement = (f_star - subgradient_f).abs() / f_star.abs().max(1.0);
    Ok(ReferenceOptimum {
        f_star,
        x_star,
        iterations: sol.iterations,
        subgradient_f,
        disagreement,
        flagged: disagreement > CROSS_CHECK_TOL,
    })
}

/// Proximal subgradient method `x <- prox_h(x - t_k (grad f(x) + s), t_k)`
/// with `t_k = c / sqrt(k)`, where `s` is a subgradient of `g` taken from
/// its envelope gradient at a tiny smoothing parameter. Returns the best
/// objective seen.
fn subgradient_run(
    p: &CompositeProblem,
    x_hint: &Mat,
    iters: usize,
) -> Result<f64, smoothprox_core::Error> {
    const SUBGRADIENT_BETA: f64 = 1e-9;
    let r = (&p.x1 - x_hint).norm().max(1e-3);
    let scale = p.g.lipschitz() + p.f.gradient(x_hint).norm() + p.f.lipschitz() * r;
    let c = r / scale.max(1e-12);
    let mut ws = ProxWorkspace::default();
    let mut x = p.x1.clone();
    let mut best = objective(p, &x);
    for k in 1..=iters {
        let t = c / (k as f64).sqrt();
        let pg = p.g.prox(&x, SUBGRADIENT_BETA)?;
        let sub = (&x - pg) / SUBGRADIENT_BETA;
        let v = &x - (p.f.gradient(&x) + sub) * t;
        x = p.h.prox(&v, t, &mut ws)?;
        let value = objective(p, &x);
        if value < best {
            best = value;
        }
    }
    Ok(best)
}
