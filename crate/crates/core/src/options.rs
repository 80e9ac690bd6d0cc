//! Caplets, caps, floors and swaptions on compounded SOFR, plus Black baselines.

use crate::classical::{annuity, forward_libor, libor_swap_rate, DiscountCurve};
use crate::curves::{CollateralFraction, MarketModel, PiecewiseConstant, RealizedHistory};
use crate::error::{Error, Result};
use crate::futures::{accumulated_variance, futures_state, FuturesContract, FuturesState, Period};
use crate::normal::cdf;
use crate::quadrature::{bisect, GaussLegendre};
use crate::swaps::{realized_sofr, swap_price, LegContext, Side, SwapSpec, TenorStructure};
use crate::vasicek::{int_n, integrated_factor_law, zcb_kernel, TIME_EPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianExchangeInputs {
    pub c1: f64,
    pub c2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExchangeValue {
    pub value: f64,
    pub k: f64,
    pub h_plus: f64,
    pub h_minus: f64,
}

/// `c1 N(h+) - c2 N(h-)` with `h+- = ln(c1/c2)/k +- k/2`; `(c1 - c2)^+` when `k = 0`.
pub fn exchange_from_k(c1: f64, c2: f64, k: f64) -> ExchangeValue {
    if c2 == 0.0 {
        return ExchangeValue { value: c1, k, h_plus: f64::INFINITY, h_minus: f64::INFINITY };
    }
    if c1 == 0.0 {
        return ExchangeValue { value: 0.0, k, h_plus: f64::NEG_INFINITY, h_minus: f64::NEG_INFINITY };
    }
    let l = (c1 / c2).ln();
    if k == 0.0 {
        let h = if l > 0.0 {
            f64::INFINITY
        } else if l < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return ExchangeValue { value: (c1 - c2).max(0.0), k, h_plus: h, h_minus: h };
    }
    let h_plus = l / k + 0.5 * k;
    let h_minus = h_plus - k;
    ExchangeValue { value: c1 * cdf(h_plus) - c2 * cdf(h_minus), k, h_plus, h_minus }
}

pub fn gaussian_exchange(inputs: &GaussianExchangeInputs) -> Result<f64> {
    Ok(gaussian_exchange_parts(inputs)?.value)
}

pub fn gaussian_exchange_parts(inputs: &GaussianExchangeInputs) -> Result<ExchangeValue> {
    let GaussianExchangeInputs { c1, c2, var1, var2, cov } = *inputs;
    if ![c1, c2, var1, var2, cov].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("non-finite exchange inputs".into()));
    }
    if c1 < 0.0 || c2 < 0.0 {
        return Err(Error::Domain("scale factors must be nonnegative".into()));
    }
    let scale = var1.abs().max(var2.abs()).max(1e-300);
    if var1 < 0.0 || var2 < 0.0 || cov * cov > var1 * var2 + 1e-12 * scale * scale {
        return Err(Error::Domain("covariance matrix is not positive semidefinite".into()));
    }
    let k2 = (var1 + var2 - 2.0 * cov).max(0.0);
    Ok(exchange_from_k(c1, c2, k2.sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapletSpec {
    pub period: Period,
    pub strike: f64,
    pub notional: f64,
    pub collateral: CollateralFraction,
}

impl CapletSpec {
    pub fn new(period: Period, strike: f64, notional: f64) -> Result<Self> {
        if !(strike > 0.0 && strike.is_finite()) {
            return Err(Error::Domain("caplet strike must be positive".into()));
        }
        if !(notional > 0.0 && notional.is_finite()) {
            return Err(Error::InvalidInput("notional must be positive".into()));
        }
        Ok(CapletSpec { period, strike, notional, collateral: CollateralFraction::none() })
    }

    pub fn collateralized(mut self, collateral: CollateralFraction) -> Self {
        self.collateral = collateral;
        self
    }
}

/// Pieces of the caplet formula, per unit notional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapletBreakdown {
    pub start: f64,
    pub end: f64,
    /// `A e^rho Y e^{(w^2(t,T) - v_Y^2)/2}`.
    pub c1: f64,
    /// `A e^rho (1 + delta kappa) e^{w^2(t,U)/2}`.
    pub c2: f64,
    pub v_y: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub y: f64,
    pub unit_price: f64,
    pub price: f64,
}

pub fn caplet_components(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    spec: &CapletSpec,
    state: &FuturesState,
) -> Result<CapletBreakdown> {
    if !(spec.strike > 0.0) {
        return Err(Error::Domain("caplet strike must be positive".into()));
    }
    let per = spec.period;
    if t > per.end + TIME_EPS {
        return Err(Error::Domain(format!("caplet settled at {} before t = {t}", per.end)));
    }
    let t = t.min(per.end);
    let p = &model.factor;
    let delta = per.delta();
    let beta_basis = model.beta_basis(&spec.collateral)?;
    let a = (-beta_basis.integral(t, per.end)).exp();
    let rho = -p.n(per.end - t) * x_t - p.a * int_n(p.b, per.end - t);
    let w2_t = p.w2(per.start - t);
    let w2_u = p.w2(per.end - t);
    let v2 = accumulated_variance(&FuturesContract::new(per), t, per.end, p)?;
    let y = state.y(delta);
    let base = a * rho.exp();
    let c1 = base * y * (0.5 * (w2_t - v2)).exp();
    let c2 = base * (1.0 + delta * spec.strike) * (0.5 * w2_u).exp();
    let ex = exchange_from_k(c1, c2, v2.sqrt());
    Ok(CapletBreakdown {
        start: per.start,
        end: per.end,
        c1,
        c2,
        v_y: ex.k,
        h_plus: ex.h_plus,
        h_minus: ex.h_minus,
        y,
        unit_price: ex.value,
        price: spec.notional * ex.value,
    })
}

pub fn caplet_price(model: &MarketModel, x_t: f64, t: f64, spec: &CapletSpec, state: &FuturesState) -> Result<f64> {
    Ok(caplet_components(model, x_t, t, spec, state)?.price)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapSpec {
    pub tenor: TenorStructure,
    pub strike: f64,
    pub notional: f64,
    pub collateral: CollateralFraction,
}

impl CapSpec {
    pub fn new(tenor: TenorStructure, strike: f64, notional: f64) -> Result<Self> {
        CapletSpec::new(tenor.period(1), strike, notional)?;
        Ok(CapSpec { tenor, strike, notional, collateral: CollateralFraction::none() })
    }

    pub fn collateralized(mut self, collateral: CollateralFraction) -> Self {
        self.collateral = collateral;
        self
    }

    pub fn caplet(&self, j: usize) -> CapletSpec {
        CapletSpec {
            period: self.tenor.period(j),
            strike: self.strike,
            notional: self.notional,
            collateral: self.collateral.clone(),
        }
    }

    pub fn payer_swap(&self) -> Result<SwapSpec> {
        Ok(SwapSpec::new(self.tenor.clone(), self.strike, self.notional, Side::Payer)?
            .collateralized(self.collateral.clone()))
    }
}

/// Live caplets of the cap at `t`.
pub fn cap_caplets(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    spec: &CapSpec,
    history: Option<&dyn RealizedHistory>,
) -> Result<Vec<CapletBreakdown>> {
    if t > spec.tenor.last() + TIME_EPS {
        return Err(Error::Domain("cap has expired".into()));
    }
    let mut out = Vec::new();
    for j in 1..=spec.tenor.n_periods() {
        let cs = spec.caplet(j);
        let per = cs.period;
        if t > per.end + TIME_EPS {
            continue;
        }
        let accrued = if t > per.start {
            let h = history.ok_or_else(|| {
                Error::MissingHistory(format!("caplet [{}, {}] is in progress at t = {t}", per.start, per.end))
            })?;
            Some(realized_sofr(model, h, per.start, t.min(per.end))?)
        } else {
            None
        };
        let state = futures_state(model, x_t, t, &FuturesContract::new(per), accrued)?;
        out.push(caplet_components(model, x_t, t, &cs, &state)?);
    }
    Ok(out)
}

pub fn cap_price(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    spec: &CapSpec,
    history: Option<&dyn RealizedHistory>,
) -> Result<f64> {
    Ok(cap_caplets(model, x_t, t, spec, history)?.iter().map(|c| c.price).sum())
}

/// Floor by parity: cap minus the payer swap at the same strike.
pub fn floor_price(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    spec: &CapSpec,
    history: Option<&dyn RealizedHistory>,
) -> Result<f64> {
    Ok(cap_price(model, x_t, t, spec, history)? - swap_price(model, x_t, t, &spec.payer_swap()?, history)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub nodes: usize,
    /// Reject when the `nodes` and `2 nodes` rules differ by more than this (per unit notional).
    pub tolerance: f64,
    /// Scan half-width in standard deviations.
    pub width: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes: 64, tolerance: 1e-8, width: 12.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwaptionResult {
    pub price: f64,
    /// Root-split closed-form evaluation of the same expectation.
    pub analytic_price: f64,
    pub nodes: usize,
    pub doubling_difference: f64,
    /// `-Cov(x_{T0}, int_t^{T0} x du)`.
    pub tilt_mean_shift: f64,
    pub tilted_mean: f64,
    pub tilted_std: f64,
    /// `B^beta(t, T0)`.
    pub discount: f64,
    pub exercise_monotone: bool,
    /// Factor level at expiry where the underlying swap is worth zero.
    pub critical_x: Option<f64>,
}

/// The underlying swap's value at expiry as `sum_i c_i exp(-n_i x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpiryPayoff {
    pub terms: Vec<(f64, f64)>,
}

impl ExpiryPayoff {
    pub fn new(model: &MarketModel, spec: &SwapSpec) -> Result<Self> {
        let ctx = LegContext::new(model, &spec.collateral)?;
        let p = &model.factor;
        let t0 = spec.tenor.first();
        let sign = spec.side.sign();
        let bond = |mat: f64| -> (f64, f64) {
            let tau = mat - t0;
            ((p.m(tau) - ctx.beta_basis.integral(t0, mat)).exp(), p.n(tau))
        };
        let mut terms = Vec::new();
        for per in spec.tenor.periods() {
            let a = ctx.spread.integral(per.start, per.end).exp();
            let (c0, n0) = bond(per.start);
            let (c1, n1) = bond(per.end);
            terms.push((sign * a * c0, n0));
            terms.push((-sign * (1.0 + per.delta() * spec.fixed_rate) * c1, n1));
        }
        Ok(ExpiryPayoff { terms })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(c, n)| c * (-n * x).exp()).sum()
    }

    /// `E[value(X) 1{lo < X < hi}]` for `X ~ N(mu, s^2)`, `s > 0`.
    fn truncated_mean(&self, mu: f64, s: f64, lo: f64, hi: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, n)| {
                let shift = mu - n * s * s;
                let mass = cdf((hi - shift) / s) - cdf((lo - shift) / s);
                c * (-n * mu + 0.5 * n * n * s * s).exp() * mass
            })
            .sum()
    }
}

const SCAN_POINTS: usize = 480;

/// Swaption with expiry at the first tenor date, exercised into `spec`.
pub fn swaption_price(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    spec: &SwapSpec,
    quad: &QuadratureConfig,
) -> Result<SwaptionResult> {
    let t0 = spec.tenor.first();
    if t > t0 + TIME_EPS {
        return Err(Error::Domain(format!("swaption expired at {t0} before t = {t}")));
    }
    if quad.nodes == 0 {
        return Err(Error::InvalidInput("quadrature needs at least one node".into()));
    }
    let t = t.min(t0);
    let p = &model.factor;
    let g = ExpiryPayoff::new(model, spec)?;
    let beta_basis = model.beta_basis(&spec.collateral)?;
    let discount = zcb_kernel(x_t, t, t0, p, &beta_basis)?;
    let law = integrated_factor_law(x_t, t, t, t0, p)?;
    let mu = law.x_mean - law.covariance;
    let s = law.x_variance.sqrt();
    let scale = spec.notional * discount;

    if s == 0.0 {
        let v = g.value(mu).max(0.0);
        let monotone = true;
        return Ok(SwaptionResult {
            price: scale * v,
            analytic_price: scale * v,
            nodes: quad.nodes,
            doubling_difference: 0.0,
            tilt_mean_shift: -law.covariance,
            tilted_mean: mu,
            tilted_std: 0.0,
            discount,
            exercise_monotone: monotone,
            critical_x: None,
        });
    }

    let f = |z: f64| g.value(mu + s * z);
    let w = quad.width;
    let zs: Vec<f64> = (0..=SCAN_POINTS).map(|i| -w + 2.0 * w * i as f64 / SCAN_POINTS as f64).collect();
    let vals: Vec<f64> = zs.iter().map(|&z| f(z)).collect();
    let increasing = vals.windows(2).all(|v| v[1] >= v[0]);
    let decreasing = vals.windows(2).all(|v| v[1] <= v[0]);
    let mut cuts = vec![-w];
    for i in 0..SCAN_POINTS {
        if (vals[i] > 0.0) != (vals[i + 1] > 0.0) {
            cuts.push(bisect(zs[i], zs[i + 1], f));
        }
    }
    cuts.push(w);
    let critical_x = (cuts.len() == 3).then(|| mu + s * cuts[1]);

    let integrate = |rule: &GaussLegendre| -> f64 {
        let mut acc = 0.0;
        for seg in cuts.windows(2) {
            let (lo, hi) = (seg[0], seg[1]);
            if hi <= lo || f(0.5 * (lo + hi)) <= 0.0 {
                continue;
            }
            acc += rule.integrate(lo, hi, |z| f(z) * crate::normal::pdf(z));
        }
        acc
    };
    let v1 = integrate(&GaussLegendre::new(quad.nodes));
    let v2 = integrate(&GaussLegendre::new(2 * quad.nodes));
    let diff = (v1 - v2).abs();
    if !(diff <= quad.tolerance) {
        return Err(Error::Numerical(format!(
            "swaption quadrature not converged: {} vs {} nodes differ by {diff:e}",
            quad.nodes,
            2 * quad.nodes
        )));
    }
    let mut analytic = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if hi > lo && f(0.5 * (lo + hi)) > 0.0 {
            let lo_x = if lo <= -w { f64::NEG_INFINITY } else { mu + s * lo };
            let hi_x = if hi >= w { f64::INFINITY } else { mu + s * hi };
            analytic += g.truncated_mean(mu, s, lo_x, hi_x);
        }
    }
    Ok(SwaptionResult {
        price: scale * v1,
        analytic_price: scale * analytic,
        nodes: quad.nodes,
        doubling_difference: diff,
        tilt_mean_shift: -law.covariance,
        tilted_mean: mu,
        tilted_std: s,
        discount,
        exercise_monotone: match spec.side {
            Side::Payer => increasing,
            Side::Receiver => decreasing,
        },
        critical_x,
    })
}

/// Deterministic lognormal volatility schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct VolSchedule(PiecewiseConstant);

impl VolSchedule {
    pub fn new(curve: PiecewiseConstant) -> Result<Self> {
        if curve.values().iter().any(|&v| v < 0.0) {
            return Err(Error::Domain("volatility must be nonnegative".into()));
        }
        Ok(VolSchedule(curve))
    }

    pub fn flat(vol: f64) -> Result<Self> {
        Self::new(PiecewiseConstant::constant(vol))
    }

    pub fn integrated_variance(&self, t0: f64, t1: f64) -> Result<f64> {
        Ok(self.0.map(|v| v * v)?.integral(t0, t1).max(0.0))
    }
}

/// Black call/put kernel `F N(d+) - K N(d-)` (or the put) with total variance `v2`.
fn black_kernel(forward: f64, strike: f64, v2: f64, call: bool) -> f64 {
    let sign = if call { 1.0 } else { -1.0 };
    if v2 <= 0.0 || forward <= 0.0 || strike <= 0.0 {
        return (sign * (forward - strike)).max(0.0);
    }
    let v = v2.sqrt();
    let d_plus = ((forward / strike).ln() + 0.5 * v2) / v;
    let d_minus = d_plus - v;
    sign * (forward * cdf(sign * d_plus) - strike * cdf(sign * d_minus))
}

pub fn black_caplet(curve: &dyn DiscountCurve, vol: &VolSchedule, period: Period, strike: f64) -> Result<f64> {
    let f = forward_libor(curve, period)?;
    let v2 = vol.integrated_variance(curve.valuation_time(), period.start)?;
    Ok(period.delta() * curve.bond(period.end)? * black_kernel(f, strike, v2, true))
}

pub fn black_floorlet(curve: &dyn DiscountCurve, vol: &VolSchedule, period: Period, strike: f64) -> Result<f64> {
    let f = forward_libor(curve, period)?;
    let v2 = vol.integrated_variance(curve.valuation_time(), period.start)?;
    Ok(period.delta() * curve.bond(period.end)? * black_kernel(f, strike, v2, false))
}

pub fn black_swaption(
    curve: &dyn DiscountCurve,
    vol: &VolSchedule,
    tenor: &TenorStructure,
    strike: f64,
    side: Side,
) -> Result<f64> {
    let k_t = libor_swap_rate(curve, tenor)?;
    let v2 = vol.integrated_variance(curve.valuation_time(), tenor.first())?;
    Ok(annuity(curve, tenor)? * black_kernel(k_t, strike, v2, side == Side::Payer))
}
