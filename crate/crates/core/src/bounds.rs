//! Constants behind the approximation guarantee: smoothness parameters,
//! the bounded-potential pair (A, B), step budget T and the ratio bound.

use serde::Serialize;

use crate::error::{GndError, Result};
use crate::instance::Instance;
use crate::sharing::RepExpansionConstants;

/// `H_n = 1 + 1/2 + ... + 1/n`; `H_0 = 0`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoreticalBounds {
    pub epsilon: f64,
    pub epsilon1: f64,
    pub rho: f64,
    pub gamma_alpha: f64,
    pub lambda_alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub t: u64,
    pub ratio_bound: f64,
}

/// `(1 + eps) / (1 - eps)`.
pub fn epsilon1(epsilon: f64) -> f64 {
    (1.0 + epsilon) / (1.0 - epsilon)
}

/// `max_e min_j (sigma_e / ((alpha_j - 1) xi_{e,j}))^(1/alpha_j)`, skipping
/// zero coefficients.
pub fn gamma_alpha(instance: &Instance) -> f64 {
    let alphas = instance.exponents().alphas();
    instance
        .resources()
        .iter()
        .map(|r| {
            r.xis
                .iter()
                .zip(alphas)
                .filter(|(xi, _)| **xi > 0.0)
                .map(|(xi, a)| (r.sigma / ((a - 1.0) * xi)).powf(1.0 / a))
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|g| g.is_finite())
        .fold(0.0, f64::max)
}

/// Smoothness parameters `(gamma + lambda_alpha rho^maxalpha, 1 / (2 rho))`.
pub fn smoothness_parameters(instance: &Instance, rho: f64, constants: &RepExpansionConstants) -> (f64, f64) {
    let exps = instance.exponents();
    let lambda = gamma_alpha(instance) + constants.lambda_alpha(exps) * rho.powf(exps.max_alpha());
    (lambda, 1.0 / (2.0 * rho))
}

pub fn theoretical_bounds(
    instance: &Instance,
    rho: f64,
    epsilon: f64,
    constants: &RepExpansionConstants,
) -> Result<TheoreticalBounds> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(GndError::Config(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(GndError::Config(format!("oracle ratio {rho} must be >= 1")));
    }
    let e1 = epsilon1(epsilon);
    if e1 * e1 >= 2.0 {
        return Err(GndError::Config(format!(
            "epsilon {epsilon} too large: epsilon1^2 = {} must stay below 2",
            e1 * e1
        )));
    }
    let exps = instance.exponents();
    let max_alpha = exps.max_alpha();
    let n = instance.n();
    let gamma = gamma_alpha(instance);
    let lambda_alpha = constants.lambda_alpha(exps);
    let (lambda, mu) = smoothness_parameters(instance, rho, constants);
    let a = harmonic(n);
    let b = exps.ceil_max_alpha();
    let denom = 1.0 - rho * e1 * e1 * mu;
    let q = 2.0 * e1 * n as f64 * a / denom;
    let log_arg = a * b * (n as f64).powf(max_alpha);
    let t = (q * log_arg.ln()).ceil().max(1.0);
    let t = if t >= u64::MAX as f64 { u64::MAX } else { t as u64 };
    Ok(TheoreticalBounds {
        epsilon,
        epsilon1: e1,
        rho,
        gamma_alpha: gamma,
        lambda_alpha,
        lambda,
        mu,
        a,
        b,
        q,
        t,
        ratio_bound: 2.0 * rho * e1 * e1 * lambda / denom,
    })
}
