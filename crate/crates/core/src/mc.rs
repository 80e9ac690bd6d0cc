//! Exact-transition Monte Carlo for the factor and its time integral.

use crate::curves::{Discounting, IntegrationScheme, MarketModel, RatePath};
use crate::error::{Error, Result};
use crate::vasicek::{integrated_factor_law, FactorParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    /// Total simulated paths; with antithetic sampling this counts both members of each pair.
    pub n_paths: usize,
    pub grid: Vec<f64>,
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(seed: u64, n_paths: usize, grid: Vec<f64>) -> Self {
        SimConfig { seed, n_paths, grid, antithetic: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidInput("need at least two paths".into()));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidInput("antithetic sampling needs an even path count".into()));
        }
        if self.grid.is_empty() || self.grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("simulation grid must be non-empty and finite".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("simulation grid must be strictly increasing".into()));
        }
        Ok(())
    }

    fn n_samples(&self) -> usize {
        if self.antithetic {
            self.n_paths / 2
        } else {
            self.n_paths
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Independent samples; an antithetic pair counts once.
    pub n_paths: usize,
}

impl McEstimate {
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

/// Per-step coefficients of the exact bivariate transition.
#[derive(Debug, Clone, Copy)]
struct StepLaw {
    decay: f64,
    x_drift: f64,
    i_slope: f64,
    i_drift: f64,
    sx: f64,
    l21: f64,
    l22: f64,
}

fn step_laws(params: &FactorParams, grid: &[f64]) -> Result<Vec<StepLaw>> {
    grid.windows(2)
        .map(|w| {
            let dt = w[1] - w[0];
            // Moments at x = 0 carry the drift; the slope in x is linear.
            let law0 = integrated_factor_law(0.0, 0.0, 0.0, dt, params)?;
            let sx = law0.x_variance.sqrt();
            let (l21, l22) = if sx > 0.0 {
                let l21 = law0.covariance / sx;
                (l21, (law0.variance - l21 * l21).max(0.0).sqrt())
            } else {
                (0.0, law0.variance.max(0.0).sqrt())
            };
            Ok(StepLaw {
                decay: (-params.b * dt).exp(),
                x_drift: law0.x_mean,
                i_slope: params.n(dt),
                i_drift: law0.mean,
                sx,
                l21,
                l22,
            })
        })
        .collect()
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_normals(rng: &mut ChaCha8Rng, steps: usize) -> Vec<(f64, f64)> {
    (0..steps).map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

fn build_path(x0: f64, grid: &[f64], laws: &[StepLaw], normals: &[(f64, f64)], sign: f64) -> RatePath {
    let mut factor = Vec::with_capacity(grid.len());
    let mut inc = Vec::with_capacity(laws.len());
    let mut x = x0;
    factor.push(x);
    for (law, &(z1, z2)) in laws.iter().zip(normals) {
        let (z1, z2) = (sign * z1, sign * z2);
        let i = law.i_slope * x + law.i_drift + law.l21 * z1 + law.l22 * z2;
        x = x * law.decay + law.x_drift + law.sx * z1;
        factor.push(x);
        inc.push(i);
    }
    RatePath { times: grid.to_vec(), factor, increments: Some(inc) }
}

/// One path for stream `index`.
pub fn simulate_path(params: &FactorParams, grid: &[f64], seed: u64, index: u64) -> Result<RatePath> {
    let laws = step_laws(params, grid)?;
    let normals = draw_normals(&mut path_rng(seed, index), laws.len());
    Ok(build_path(params.x0, grid, &laws, &normals, 1.0))
}

/// All paths of the configuration, in path order. Antithetic partners are adjacent.
pub fn simulate_paths(params: &FactorParams, config: &SimConfig) -> Result<Vec<RatePath>> {
    config.validate()?;
    let laws = step_laws(params, &config.grid)?;
    let per_sample: Vec<Vec<RatePath>> = (0..config.n_samples())
        .into_par_iter()
        .map(|k| {
            let normals = draw_normals(&mut path_rng(config.seed, k as u64), laws.len());
            let mut out = vec![build_path(params.x0, &config.grid, &laws, &normals, 1.0)];
            if config.antithetic {
                out.push(build_path(params.x0, &config.grid, &laws, &normals, -1.0));
            }
            out
        })
        .collect();
    Ok(per_sample.into_iter().flatten().collect())
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &v in xs {
            acc += v;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

fn estimate(samples: &[f64]) -> McEstimate {
    let n = samples.len();
    let mean = pairwise_sum(samples) / n as f64;
    let dev: Vec<f64> = samples.iter().map(|&v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n as f64 - 1.0);
    McEstimate { mean, std_error: (var / n as f64).sqrt(), n_paths: n }
}

/// Monte-Carlo mean of an arbitrary path statistic.
pub fn mc_expectation<F>(params: &FactorParams, config: &SimConfig, statistic: F) -> Result<McEstimate>
where
    F: Fn(&RatePath) -> Result<f64> + Sync,
{
    config.validate()?;
    let laws = step_laws(params, &config.grid)?;
    let results: Vec<Result<f64>> = (0..config.n_samples())
        .into_par_iter()
        .map(|k| {
            let normals = draw_normals(&mut path_rng(config.seed, k as u64), laws.len());
            let first = build_path(params.x0, &config.grid, &laws, &normals, 1.0);
            let mut v = checked(statistic(&first)?, if config.antithetic { 2 * k } else { k })?;
            if config.antithetic {
                let second = build_path(params.x0, &config.grid, &laws, &normals, -1.0);
                v = 0.5 * (v + checked(statistic(&second)?, 2 * k + 1)?);
            }
            Ok(v)
        })
        .collect();
    let samples = results.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(estimate(&samples))
}

fn checked(v: f64, path_index: usize) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { path_index })
    }
}

/// Cash flows `(payment time, amount)` produced by one path.
pub type Cashflows = Vec<(f64, f64)>;

/// Discounted value at `config.grid[0]` of the payoff's cash flows. Without
/// discounting the plain expectation of the summed amounts is returned.
/// Payment times must lie on the grid.
pub fn mc_price<F>(model: &MarketModel, payoff: F, discount: Option<&Discounting>, config: &SimConfig) -> Result<McEstimate>
where
    F: Fn(&RatePath) -> Result<Cashflows> + Sync,
{
    let basis = discount.map(|d| model.discount_basis(d)).transpose()?;
    let t0 = config.grid.first().copied().unwrap_or(0.0);
    mc_expectation(&model.factor, config, |path| {
        let mut total = 0.0;
        for (tau, amount) in payoff(path)? {
            let df = match &basis {
                Some(b) => (-(path.integrate_factor(t0, tau, IntegrationScheme::Exact)? + b.integral(t0, tau))).exp(),
                None => 1.0,
            };
            total += df * amount;
        }
        Ok(total)
    })
}
