//! Smoothing-parameter schedules and the objective-gap bounds they certify.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Policy producing the smoothing parameters `beta_1, beta_2, ...`.
///
/// Every variant must be positive and nonincreasing in `k`; the gap bounds
/// below rely on it.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSchedule {
    /// `beta_k = beta` for all `k`. Converges to the minimizer of the
    /// smoothed objective, which is within `beta rho^2 / 2` of the optimum.
    Fixed(f64),
    /// `beta_k = 1 / (a k)`.
    Dynamic(f64),
    /// Explicit values for `k = 1, 2, ...`; the last one repeats.
    Sequence(Vec<f64>),
}

impl BetaSchedule {
    pub fn fixed(beta: f64) -> Result<Self> {
        let s = BetaSchedule::Fixed(beta);
        s.validate()?;
        Ok(s)
    }

    pub fn dynamic(a: f64) -> Result<Self> {
        let s = BetaSchedule::Dynamic(a);
        s.validate()?;
        Ok(s)
    }

    pub fn sequence(betas: Vec<f64>) -> Result<Self> {
        let s = BetaSchedule::Sequence(betas);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self {
            BetaSchedule::Fixed(b) if !positive(*b) => Err(Error::invalid(format!(
                "fixed schedule: beta must be positive, got {b}"
            ))),
            BetaSchedule::Dynamic(a) if !positive(*a) => Err(Error::invalid(format!(
                "dynamic schedule: a must be positive, got {a}"
            ))),
            BetaSchedule::Sequence(v) => {
                if v.is_empty() {
                    return Err(Error::invalid("beta sequence is empty"));
                }
                if let Some(i) = v.iter().position(|b| !positive(*b)) {
                    return Err(Error::invalid(format!(
                        "beta sequence: entry {} is not positive ({})",
                        i + 1,
                        v[i]
                    )));
                }
                if let Some(i) = v.windows(2).position(|w| w[1] > w[0]) {
                    return Err(Error::ScheduleViolation {
                        iteration: i + 1,
                        beta: v[i],
                        beta_next: v[i + 1],
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `beta_k`, for `k >= 1`.
    pub fn beta(&self, k: usize) -> f64 {
        let k = k.max(1);
        match self {
            BetaSchedule::Fixed(b) => *b,
            BetaSchedule::Dynamic(a) => 1.0 / (a * k as f64),
            BetaSchedule::Sequence(v) => v[(k - 1).min(v.len() - 1)],
        }
    }
}

/// Constant smoothing tuned for a budget of `t` iterations:
/// `beta = 2 R / (rho (t + 1))`.
///
/// `r` estimates `|x_1 - x*|`. The guarantee degrades with the estimate's
/// error, and extra iterations beyond `t` do not remove the smoothing bias.
pub fn fixed_beta(t: usize, r: f64, rho: f64) -> Result<BetaSchedule> {
    if t == 0 || !(r > 0.0) || !(rho > 0.0) {
        return Err(Error::invalid(format!(
            "fixed_beta: need T >= 1, R > 0, rho > 0 (got T = {t}, R = {r}, rho = {rho})"
        )));
    }
    BetaSchedule::fixed(2.0 * r / (rho * (t as f64 + 1.0)))
}

/// Upper bound on `F(x_{t+1}) - F(x*)` for the constant schedule from
/// [`fixed_beta`] with an exact `dist = |x_1 - x*|`.
pub fn fixed_gap_bound(t: usize, lf: f64, rho: f64, dist: f64) -> f64 {
    let t1 = t as f64 + 1.0;
    2.0 * lf * dist * dist / (t1 * t1) + 2.0 * rho * dist / t1
}

/// Upper bound on `F(x_{k+1}) - F(x*)` under `Dynamic(a)`, where
/// `dist = |x_1 - x*|`:
///
/// `2 (lf + a k) / (k + 1)^2 * [dist^2 + rho^2 / a * (3 / (2a) log((lf + a k) / (lf + a)) + 1 / (lf + a))]`
pub fn dynamic_gap_bound(k: usize, lf: f64, a: f64, rho: f64, dist: f64) -> f64 {
    let kf = k as f64;
    let lk = lf + a * kf;
    let l1 = lf + a;
    let smoothing = rho * rho / a * (1.5 / a * math::ln(lk / l1) + 1.0 / l1);
    2.0 * lk / ((kf + 1.0) * (kf + 1.0)) * (dist * dist + smoothing)
}
