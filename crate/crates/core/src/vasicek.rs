//! Gaussian factor `dx = (a - b x) dt + sigma dW` and its analytic functionals.
//!
//! The kernels below are written through the entire functions
//! `phi_k(z) = (e^z - sum_{j<k} z^j/j!) / z^k`, which stay accurate for
//! `b -> 0` without any branch switch in the callers.

use crate::curves::BasisCurve;
use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

/// Absolute slack when comparing model times.
pub const TIME_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl FactorParams {
    pub fn new(a: f64, b: f64, sigma: f64, x0: f64) -> Result<Self> {
        let p = FactorParams { a, b, sigma, x0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.b, self.sigma, self.x0].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("factor parameters must be finite".into()));
        }
        if self.b < 0.0 {
            return domain("mean-reversion speed b must be >= 0");
        }
        if self.sigma < 0.0 {
            return domain("volatility sigma must be >= 0");
        }
        Ok(())
    }

    /// `n(t, t + tau)`.
    pub fn n(&self, tau: f64) -> f64 {
        n_tau(self.b, tau)
    }

    /// `w^2(t, t + tau) = sigma^2 int_0^tau n(s)^2 ds`.
    pub fn w2(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            0.0
        } else {
            self.sigma * self.sigma * int_n2(self.b, tau)
        }
    }

    /// `m(t, t + tau)`.
    pub fn m(&self, tau: f64) -> f64 {
        0.5 * self.sigma * self.sigma * int_n2(self.b, tau) - self.a * int_n(self.b, tau)
    }
}

const SERIES_CUTOFF: f64 = 1.0;

fn phi_series(z: f64, k: u32) -> f64 {
    // sum_j z^j / (j + k)!
    let mut fact = 1.0;
    for i in 2..=k {
        fact *= i as f64;
    }
    let mut term = 1.0 / fact;
    let mut sum = term;
    for j in 1..40 {
        term *= z / (j + k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

pub fn phi1(z: f64) -> f64 {
    if z.abs() < SERIES_CUTOFF {
        phi_series(z, 1)
    } else {
        z.exp_m1() / z
    }
}

pub fn phi2(z: f64) -> f64 {
    if z.abs() < SERIES_CUTOFF {
        phi_series(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

pub fn phi3(z: f64) -> f64 {
    if z.abs() < SERIES_CUTOFF {
        phi_series(z, 3)
    } else {
        (z.exp_m1() - z - 0.5 * z * z) / (z * z * z)
    }
}

/// `(1 - e^{-b tau}) / b`, with limit `tau` at `b = 0`.
pub fn n_tau(b: f64, tau: f64) -> f64 {
    tau * phi1(-b * tau)
}

/// `int_0^tau n(s) ds`.
pub fn int_n(b: f64, tau: f64) -> f64 {
    tau * tau * phi2(-b * tau)
}

/// `int_0^tau n(s)^2 ds`.
pub fn int_n2(b: f64, tau: f64) -> f64 {
    2.0 * tau * tau * tau * (2.0 * phi3(-2.0 * b * tau) - phi3(-b * tau))
}

/// `int_0^tau e^{-2 b s} ds`.
pub fn int_exp2(b: f64, tau: f64) -> f64 {
    tau * phi1(-2.0 * b * tau)
}

fn check_order(t: f64, big_t: f64) -> Result<f64> {
    if !(t.is_finite() && big_t.is_finite()) {
        return Err(Error::InvalidInput("non-finite time".into()));
    }
    if t > big_t + TIME_EPS {
        return domain(format!("require t <= T, got t = {t}, T = {big_t}"));
    }
    Ok((big_t - t).max(0.0))
}

pub fn n_factor(t: f64, big_t: f64, b: f64) -> Result<f64> {
    if b < 0.0 {
        return domain("b must be >= 0");
    }
    Ok(n_tau(b, check_order(t, big_t)?))
}

pub fn m_factor(t: f64, big_t: f64, params: &FactorParams) -> Result<f64> {
    Ok(params.m(check_order(t, big_t)?))
}

/// `exp(m(t,T) - n(t,T) x_t - int_t^T alpha)`.
pub fn zcb_kernel(x_t: f64, t: f64, big_t: f64, params: &FactorParams, basis: &BasisCurve) -> Result<f64> {
    let tau = check_order(t, big_t)?;
    if tau == 0.0 {
        return Ok(1.0);
    }
    Ok((params.m(tau) - params.n(tau) * x_t - basis.integral(t, big_t)).exp())
}

/// Conditional law given `x_t` of `I = int_T^U x du` and of `x_U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratedFactorLaw {
    /// `mu(t,T,U)`.
    pub mean: f64,
    /// `v^2(t,T,U)`.
    pub variance: f64,
    pub x_mean: f64,
    pub x_variance: f64,
    /// `Cov(x_U, I)`.
    pub covariance: f64,
}

impl IntegratedFactorLaw {
    pub fn covariance_matrix(&self) -> [[f64; 2]; 2] {
        [[self.x_variance, self.covariance], [self.covariance, self.variance]]
    }
}

pub fn integrated_factor_law(
    x_t: f64,
    t: f64,
    big_t: f64,
    u: f64,
    params: &FactorParams,
) -> Result<IntegratedFactorLaw> {
    let tt = check_order(t, big_t)?;
    let tu = check_order(big_t, u)?;
    let b = params.b;
    let s2 = params.sigma * params.sigma;
    let total = tt + tu;
    let n_tu = n_tau(b, tu);
    let decay_tu = (-b * tu).exp();
    let ex2 = int_exp2(b, tt);

    let mean = (n_tau(b, total) - n_tau(b, tt)) * x_t + params.a * (int_n(b, total) - int_n(b, tt));
    let variance = s2 * (n_tu * n_tu * ex2 + int_n2(b, tu));
    let x_mean = x_t * (-b * total).exp() + params.a * n_tau(b, total);
    let x_variance = s2 * int_exp2(b, total);
    let covariance = s2 * (n_tu * decay_tu * ex2 + 0.5 * n_tu * n_tu);
    Ok(IntegratedFactorLaw { mean, variance, x_mean, x_variance, covariance })
}
