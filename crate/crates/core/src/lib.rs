//! Composite convex minimization of `f + g + h` by proximal iterative smoothing.
//!
//! `f` is smooth with a known gradient Lipschitz constant, `g` is Lipschitz
//! with a cheap proximity operator and is replaced by its Moreau envelope
//! under a decreasing smoothing schedule, and `h` is an extended-valued
//! "simple" term (an indicator, a norm, a barrier) handled through its
//! proximity operator. Every iterate stays inside `dom h`.
//!
//! The crate is `no_std` and only needs `alloc`. Points are dense
//! [`Mat`] values; vectors are single-column matrices.

#![no_std]

extern crate alloc;

mod error;
pub mod linalg;
mod math;
pub mod problems;
pub mod prox;
pub mod schedule;
pub mod smoothing;
pub mod solver;
pub mod terms;

pub use error::{Error, Result};
pub use schedule::BetaSchedule;
pub use smoothing::{moreau_grad, moreau_value, LipschitzTerm};
pub use solver::{
    objective, prisma_step, solve, solve_with, theta_next, Clock, CompositeProblem, IterationInfo,
    NoClock, ProxWorkspace, RunTrace, SimpleTerm, SmoothTerm, Solution, SolveOptions, SolverState,
    StopReason, TraceRecord,
};

/// Dense real matrix. Vectors are `n x 1`.
pub type Mat = nalgebra::DMatrix<f64>;
