//! Moreau envelope of a Lipschitz term, evaluated through its prox.
//!
//! `g_beta(x) = min_u |x - u|^2 / (2 beta) + g(u)` is `1/beta`-smooth with
//! gradient `(x - prox_g(x, beta)) / beta`, and for `rho`-Lipschitz `g`
//! satisfies `g_beta <= g <= g_beta + beta rho^2 / 2`. Nothing is cached:
//! the solver changes `beta` every iteration.

use alloc::format;

use crate::{Error, Mat, Result};

/// A convex, `rho`-Lipschitz function with a computable proximity operator.
pub trait LipschitzTerm: Send + Sync {
    fn value(&self, x: &Mat) -> f64;

    /// `argmin_u |x - u|^2 / (2 alpha) + self(u)`.
    fn prox(&self, x: &Mat, alpha: f64) -> Result<Mat>;

    /// Declared Lipschitz constant with respect to the Frobenius norm.
    fn lipschitz(&self) -> f64;
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!(
            "smoothing parameter must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

pub fn moreau_value(g: &dyn LipschitzTerm, x: &Mat, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let p = g.prox(x, beta)?;
    Ok((x - &p).norm_squared() / (2.0 * beta) + g.value(&p))
}

pub fn moreau_grad(g: &dyn LipschitzTerm, x: &Mat, beta: f64) -> Result<Mat> {
    check_beta(beta)?;
    let p = g.prox(x, beta)?;
    Ok((x - p) / beta)
}
