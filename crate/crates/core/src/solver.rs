//! The accelerated proximal smoothing iteration.
//!
//! With `L_k = L_f + 1/beta_k`, iteration `k` computes
//!
//! ```text
//! L_{k+1}     = L_f + 1/beta_{k+1}
//! theta_{k+1} = 2 / (1 + sqrt(1 + 4 L_{k+1} / (theta_k^2 L_k)))
//! x_{k+1}     = prox_h((1 - c) y_k - grad f(y_k) / L_k + c prox_g(y_k, beta_k), 1/L_k),  c = 1/(L_k beta_k)
//! y_{k+1}     = x_{k+1} + theta_{k+1} (1/theta_k - 1) (x_{k+1} - x_k)
//! ```
//!
//! starting from `x_1 = y_1 in dom h`, `theta_1 = 1`. That is a proximal
//! gradient step on `f` plus the Moreau envelope of `g` with parameter
//! `beta_k`, so every `x_k` (k >= 2) is an output of `prox_h`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::schedule::BetaSchedule;
use crate::smoothing::LipschitzTerm;
use crate::{Error, Mat, Result};

/// Convex, differentiable, with `lipschitz()`-Lipschitz gradient.
pub trait SmoothTerm: Send + Sync {
    fn value(&self, x: &Mat) -> f64;
    fn gradient(&self, x: &Mat) -> Mat;
    fn lipschitz(&self) -> f64;
}

/// Proper, lower semicontinuous, convex; possibly `+inf`.
pub trait SimpleTerm: Send + Sync {
    /// `f64::INFINITY` outside the domain.
    fn value(&self, x: &Mat) -> f64;

    /// The output must lie in the domain.
    fn prox(&self, x: &Mat, alpha: f64, ws: &mut ProxWorkspace) -> Result<Mat>;
}

/// Per-run scratch state shared with [`SimpleTerm::prox`]: spectral terms
/// record the rank of their last output here and may use it as a warm
/// start on the next call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProxWorkspace {
    pub last_rank: Option<usize>,
    /// Eigen/singular pairs requested by the last prox call.
    pub last_pairs_computed: Option<usize>,
}

/// `min f(x) + g(x) + h(x)` together with a starting point in `dom h`.
pub struct CompositeProblem {
    pub f: Box<dyn SmoothTerm>,
    pub g: Box<dyn LipschitzTerm>,
    pub h: Box<dyn SimpleTerm>,
    pub x1: Mat,
}

impl core::fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("lf", &self.f.lipschitz())
            .field("rho_g", &self.g.lipschitz())
            .field("shape", &self.x1.shape())
            .finish()
    }
}

impl CompositeProblem {
    pub fn new(
        f: Box<dyn SmoothTerm>,
        g: Box<dyn LipschitzTerm>,
        h: Box<dyn SimpleTerm>,
        x1: Mat,
    ) -> Result<Self> {
        let lf = f.lipschitz();
        let rho = g.lipschitz();
        if !(lf >= 0.0) || !lf.is_finite() {
            return Err(Error::invalid(format!(
                "L_f must be finite and >= 0, got {lf}"
            )));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::invalid(format!(
                "rho_g must be finite and >= 0, got {rho}"
            )));
        }
        if x1.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial point has non-finite entries"));
        }
        if !h.value(&x1).is_finite() {
            return Err(Error::invalid("initial point is outside dom h"));
        }
        Ok(CompositeProblem { f, g, h, x1 })
    }

    pub fn lf(&self) -> f64 {
        self.f.lipschitz()
    }

    pub fn rho(&self) -> f64 {
        self.g.lipschitz()
    }
}

/// `F(x) = f(x) + g(x) + h(x)`; `+inf` outside `dom h`.
pub fn objective(p: &CompositeProblem, x: &Mat) -> f64 {
    let h = p.h.value(x);
    if h == f64::INFINITY {
        return f64::INFINITY;
    }
    p.f.value(x) + p.g.value(x) + h
}

/// Iterates of one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Index of `x`, starting at 1.
    pub k: usize,
    pub x: Mat,
    pub x_prev: Mat,
    pub y: Mat,
    pub theta: f64,
    /// `L_k = L_f + 1/beta_k`.
    pub lipschitz: f64,
    pub workspace: ProxWorkspace,
}

impl SolverState {
    pub fn new(p: &CompositeProblem, beta1: f64) -> Result<Self> {
        if !(beta1 > 0.0) || !beta1.is_finite() {
            return Err(Error::invalid(format!(
                "beta_1 must be positive, got {beta1}"
            )));
        }
        Ok(SolverState {
            k: 1,
            x: p.x1.clone(),
            x_prev: p.x1.clone(),
            y: p.x1.clone(),
            theta: 1.0,
            lipschitz: p.lf() + 1.0 / beta1,
            workspace: ProxWorkspace::default(),
        })
    }
}

/// Momentum update: the root in `(0, 1]` of
/// `1/t^2 - 1/t = (l_next / l) / theta^2`.
pub fn theta_next(theta: f64, l: f64, l_next: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) || !(l > 0.0) || !(l_next > 0.0) {
        return Err(Error::invalid(format!(
            "theta_next: need theta in (0, 1], L > 0 (theta = {theta}, L = {l}, L_next = {l_next})"
        )));
    }
    Ok(2.0 / (1.0 + math::sqrt(1.0 + 4.0 * l_next / (theta * theta * l))))
}

/// One iteration, advancing `state` from `x_k` to `x_{k+1}`.
pub fn prisma_step(
    state: SolverState,
    p: &CompositeProblem,
    beta: f64,
    beta_next: f64,
) -> Result<SolverState> {
    let k = state.k;
    for (name, b) in [("beta_k", beta), ("beta_next", beta_next)] {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!("{name} must be positive, got {b}")));
        }
    }
    if beta_next > beta {
        return Err(Error::ScheduleViolation {
            iteration: k,
            beta,
            beta_next,
        });
    }
    let lf = p.lf();
    let l = state.lipschitz;
    let expected = lf + 1.0 / beta;
    if (l - expected).abs() > 1e-12 * expected {
        return Err(Error::invalid(format!(
            "state has L = {l} but L_f + 1/beta_k = {expected}"
        )));
    }
    let l_next = lf + 1.0 / beta_next;
    let theta = theta_next(state.theta, l, l_next)?;

    let c = 1.0 / (l * beta);
    let y = &state.y;
    let mut z = y * (1.0 - c);
    z -= p.f.gradient(y) / l;
    z += p.g.prox(y, beta).map_err(|e| e.at_iteration(k))? * c;
    let mut workspace = state.workspace;
    let x_next =
        p.h.prox(&z, 1.0 / l, &mut workspace)
            .map_err(|e| e.at_iteration(k))?;
    if x_next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: "iterate has non-finite entries".into(),
            iteration: Some(k),
        });
    }
    let momentum = theta * (1.0 / state.theta - 1.0);
    let y_next = &x_next + (&x_next - &state.x) * momentum;
    Ok(SolverState {
        k: k + 1,
        x: x_next,
        x_prev: state.x,
        y: y_next,
        theta,
        lipschitz: l_next,
        workspace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stop when `|x_{k+1} - x_k| / |x_k| < rel_tol` (absolute step when
    /// `|x_k| < 1e-12`).
    pub rel_tol: f64,
    /// Evaluate and record `F` every this many iterations (the last one is
    /// always recorded).
    pub trace_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 10_000,
            rel_tol: 1e-5,
            trace_every: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    IterationCap,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::IterationCap => "iteration-cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Iterations performed; the objective belongs to `x_{iter + 1}`.
    pub iter: usize,
    pub objective: f64,
    pub best_objective: f64,
    pub rel_step: f64,
    pub elapsed_s: f64,
    pub rank_estimate: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Best-objective iterate seen (including `x_1`).
    pub x: Mat,
    pub best_objective: f64,
    pub last: Mat,
    pub last_objective: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: RunTrace,
}

/// Source of elapsed wall time; `no_std` callers may use [`NoClock`].
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// What an observer sees after each iteration.
pub struct IterationInfo<'a> {
    /// Iterations performed so far.
    pub k: usize,
    /// `theta_k` and `L_k` used by this iteration.
    pub theta_prev: f64,
    pub lipschitz_prev: f64,
    pub beta: f64,
    pub state: &'a SolverState,
    pub objective: Option<f64>,
    pub rel_step: f64,
}

pub fn solve(
    p: &CompositeProblem,
    schedule: &BetaSchedule,
    opts: &SolveOptions,
) -> Result<Solution> {
    solve_with(p, schedule, opts, &NoClock, &mut |_| {})
}

pub fn solve_with(
    p: &CompositeProblem,
    schedule: &BetaSchedule,
    opts: &SolveOptions,
    clock: &dyn Clock,
    observer: &mut dyn FnMut(&IterationInfo<'_>),
) -> Result<Solution> {
    schedule.validate()?;
    if opts.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if !(opts.rel_tol >= 0.0) {
        return Err(Error::invalid(format!(
            "rel_tol must be >= 0, got {}",
            opts.rel_tol
        )));
    }
    let trace_every = opts.trace_every.max(1);

    let mut state = SolverState::new(p, schedule.beta(1))?;
    let mut best_objective = objective(p, &p.x1);
    let mut best_x = p.x1.clone();
    let mut last_objective = best_objective;
    let mut trace = RunTrace::default();
    let mut stop = StopReason::IterationCap;
    let mut iterations = 0;

    for k in 1..=opts.max_iter {
        let beta = schedule.beta(k);
        let (theta_prev, lipschitz_prev) = (state.theta, state.lipschitz);
        state = prisma_step(state, p, beta, schedule.beta(k + 1))?;
        iterations = k;

        let step = (&state.x - &state.x_prev).norm();
        let base = state.x_prev.norm();
        let rel_step = if base < 1e-12 { step } else { step / base };
        let converged = rel_step < opts.rel_tol;
        let record = converged || k == opts.max_iter || k % trace_every == 0;

        let mut obj = None;
        if record {
            let value = objective(p, &state.x);
            if !value.is_finite() {
                return Err(Error::Numerical {
                    message: format!("objective is {value} at the new iterate"),
                    iteration: Some(k),
                });
            }
            if value < best_objective {
                best_objective = value;
                best_x.copy_from(&state.x);
            }
            last_objective = value;
            trace.records.push(TraceRecord {
                iter: k,
                objective: value,
                best_objective,
                rel_step,
                elapsed_s: clock.elapsed_secs(),
                rank_estimate: state.workspace.last_rank,
            });
            obj = Some(value);
        }
        observer(&IterationInfo {
            k,
            theta_prev,
            lipschitz_prev,
            beta,
            state: &state,
            objective: obj,
            rel_step,
        });
        if converged {
            stop = StopReason::Converged;
            break;
        }
    }

    Ok(Solution {
        x: best_x,
        best_objective,
        last: state.x,
        last_objective,
        iterations,
        stop,
        trace,
    })
}
