//! Reference model and independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use sofr_core::curves::{MarketModel, RealizedHistory};
use sofr_core::vasicek::FactorParams;
use sofr_core::Result;
use std::f64::consts::PI;

pub fn reference_params() -> FactorParams {
    FactorParams::new(0.02, 0.3, 0.01, 0.03).unwrap()
}

/// Bases in the order s, e, u, c, h.
pub const REFERENCE_BASES: [f64; 5] = [-0.0005, 0.0, 0.003, 0.0, 0.001];

pub fn reference_model() -> MarketModel {
    MarketModel::flat(reference_params(), REFERENCE_BASES).unwrap()
}

/// Realized factor integral reported as a single number for one interval start.
pub struct FixedAccrual {
    pub from: f64,
    /// `int_from^to x du` for every queried `to`.
    pub value: f64,
}

impl RealizedHistory for FixedAccrual {
    fn factor_integral(&self, from: f64, _to: f64) -> Result<f64> {
        assert!((from - self.from).abs() < 1e-12, "unexpected accrual start {from}");
        Ok(self.value)
    }
}

fn simpson_rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Stop at the tolerance or once rounding dominates the correction.
    if depth == 0 || delta.abs() <= (15.0 * eps).max(64.0 * f64::EPSILON * (left + right).abs()) {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// Adaptive Simpson quadrature with absolute tolerance `eps`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, eps, 30)
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = (j + 1) as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `E f(Z)` for standard normal `Z` by `n`-point Gauss-Hermite.
pub fn normal_expectation(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_hermite(n);
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        acc += wi * f(std::f64::consts::SQRT_2 * xi);
    }
    acc / PI.sqrt()
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `(1 - e^{-b tau}) / b` written out directly (needs `b` away from zero).
pub fn n_direct(b: f64, tau: f64) -> f64 {
    if b == 0.0 {
        tau
    } else {
        (1.0 - (-b * tau).exp()) / b
    }
}

/// Deterministic factor path `x(u)` started from `x_t` at `t`.
pub fn ode_factor(p: &FactorParams, x_t: f64, t: f64, u: f64) -> f64 {
    let e = (-p.b * (u - t)).exp();
    x_t * e + p.a * n_direct(p.b, u - t)
}

/// `int_t^T x(u) du` along the deterministic path, by quadrature.
pub fn ode_integral(p: &FactorParams, x_t: f64, t: f64, big_t: f64) -> f64 {
    adaptive_simpson(|u| ode_factor(p, x_t, t, u), t, big_t, 1e-16)
}

/// Relative difference with a floor on the scale.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Minimal deterministic generator for test-state sampling.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

#[test]
fn hermite_rule_integrates_moments() {
    let m2 = normal_expectation(40, |z| z * z);
    let m4 = normal_expectation(40, |z| z.powi(4));
    assert!((m2 - 1.0).abs() < 1e-13);
    assert!((m4 - 3.0).abs() < 1e-12);
    let s = adaptive_simpson(|x| x.sin(), 0.0, PI, 1e-14);
    assert!((s - 2.0).abs() < 1e-12);
}
