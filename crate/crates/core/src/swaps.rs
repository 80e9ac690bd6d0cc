//! SOFR swaps settled in arrears: prices, fair rates and the futures-based
//! representation of the single-period price.

use crate::curves::{BasisCurve, CollateralFraction, MarketModel, RealizedHistory};
use crate::error::{Error, Result};
use crate::futures::{FuturesState, Period};
use crate::vasicek::{int_n, zcb_kernel, TIME_EPS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenorStructure {
    dates: Vec<f64>,
}

impl TenorStructure {
    pub fn new(dates: Vec<f64>) -> Result<Self> {
        if dates.len() < 2 {
            return Err(Error::InvalidInput("a tenor needs at least two dates".into()));
        }
        if dates.iter().any(|d| !d.is_finite()) || dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("tenor dates must be finite and strictly increasing".into()));
        }
        Ok(TenorStructure { dates })
    }

    /// `n` equal periods of length `delta` starting at `start`.
    pub fn regular(start: f64, delta: f64, n: usize) -> Result<Self> {
        Self::new((0..=n).map(|j| start + delta * j as f64).collect())
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn n_periods(&self) -> usize {
        self.dates.len() - 1
    }

    /// Period `j` (1-based) is `[T_{j-1}, T_j]`.
    pub fn period(&self, j: usize) -> Period {
        Period { start: self.dates[j - 1], end: self.dates[j] }
    }

    pub fn periods(&self) -> impl Iterator<Item = Period> + '_ {
        self.dates.windows(2).map(|w| Period { start: w[0], end: w[1] })
    }

    pub fn first(&self) -> f64 {
        self.dates[0]
    }

    pub fn last(&self) -> f64 {
        *self.dates.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Pays fixed, receives compounded SOFR.
    #[default]
    Payer,
    Receiver,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Payer => 1.0,
            Side::Receiver => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapSpec {
    pub tenor: TenorStructure,
    pub fixed_rate: f64,
    pub notional: f64,
    pub side: Side,
    pub collateral: CollateralFraction,
}

impl SwapSpec {
    pub fn new(tenor: TenorStructure, fixed_rate: f64, notional: f64, side: Side) -> Result<Self> {
        if !(notional > 0.0 && notional.is_finite()) {
            return Err(Error::InvalidInput("notional must be positive".into()));
        }
        if !fixed_rate.is_finite() {
            return Err(Error::InvalidInput("fixed rate must be finite".into()));
        }
        Ok(SwapSpec { tenor, fixed_rate, notional, side, collateral: CollateralFraction::none() })
    }

    pub fn collateralized(mut self, collateral: CollateralFraction) -> Self {
        self.collateral = collateral;
        self
    }

    pub fn with_fixed_rate(&self, fixed_rate: f64) -> Self {
        SwapSpec { fixed_rate, ..self.clone() }
    }

    pub fn with_side(&self, side: Side) -> Self {
        SwapSpec { side, ..self.clone() }
    }
}

/// One live leg, per unit notional, payer orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegValue {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    /// Value of the compounded SOFR payment `1 + delta R`.
    pub floating: f64,
    /// `B^beta(t, T_j)`.
    pub discount: f64,
    pub delta: f64,
    pub in_period: bool,
}

impl LegValue {
    pub fn value(&self, kappa: f64) -> f64 {
        self.floating - (1.0 + self.delta * kappa) * self.discount
    }
}

/// Realized `int_T^t r^s du`.
pub fn realized_sofr(model: &MarketModel, history: &dyn RealizedHistory, from: f64, to: f64) -> Result<f64> {
    Ok(history.factor_integral(from, to)? + model.s.integral(from, to))
}

pub(crate) struct LegContext {
    pub beta_basis: BasisCurve,
    pub spread: BasisCurve,
}

impl LegContext {
    pub fn new(model: &MarketModel, collateral: &CollateralFraction) -> Result<Self> {
        let beta_basis = model.beta_basis(collateral)?;
        let spread = model.s.minus(&beta_basis)?;
        Ok(LegContext { beta_basis, spread })
    }
}

/// Leg values at `t`. Legs with `T_j < t` have settled and are omitted; a leg
/// is still reported at `t = T_j`, so prices at payment dates are cum-coupon.
/// `accrued(j)` supplies the realized SOFR integral for an in-progress leg.
pub(crate) fn legs_with(
    model: &MarketModel,
    ctx: &LegContext,
    x_t: f64,
    t: f64,
    tenor: &TenorStructure,
    mut accrued: impl FnMut(usize, Period) -> Result<f64>,
) -> Result<Vec<LegValue>> {
    if t > tenor.last() + TIME_EPS {
        return Err(Error::Domain(format!("swap ended at {} before t = {t}", tenor.last())));
    }
    let p = &model.factor;
    let mut out = Vec::with_capacity(tenor.n_periods());
    for (k, per) in tenor.periods().enumerate() {
        if t > per.end + TIME_EPS {
            continue;
        }
        let delta = per.delta();
        let discount = zcb_kernel(x_t, t.min(per.end), per.end, p, &ctx.beta_basis)?;
        let (floating, in_period) = if t <= per.start {
            let a = ctx.spread.integral(per.start, per.end).exp();
            (a * zcb_kernel(x_t, t, per.start, p, &ctx.beta_basis)?, false)
        } else {
            let acc = accrued(k + 1, per)?;
            ((acc + ctx.spread.integral(t.min(per.end), per.end)).exp(), true)
        };
        out.push(LegValue { index: k + 1, start: per.start, end: per.end, floating, discount, delta, in_period });
    }
    Ok(out)
}

fn history_accrual<'a>(
    model: &'a MarketModel,
    history: Option<&'a dyn RealizedHistory>,
    t: f64,
) -> impl FnMut(usize, Period) -> Result<f64> + 'a {
    move |_, per| {
        let h = history.ok_or_else(|| {
            Error::MissingHistory(format!("leg [{}, {}] is in progress at t = {t}", per.start, per.end))
        })?;
        realized_sofr(model, h, per.start, t.min(per.end))
    }
}

pub fn swap_legs(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    tenor: &TenorStructure,
    collateral: &CollateralFraction,
    history: Option<&dyn RealizedHistory>,
) -> Result<Vec<LegValue>> {
    let ctx = LegContext::new(model, collateral)?;
    legs_with(model, &ctx, x_t, t, tenor, history_accrual(model, history, t))
}

/// Price of the swap to the party on `spec.side`.
pub fn swap_price(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    spec: &SwapSpec,
    history: Option<&dyn RealizedHistory>,
) -> Result<f64> {
    let legs = swap_legs(model, x_t, t, &spec.tenor, &spec.collateral, history)?;
    Ok(price_from_legs(&legs, spec))
}

pub fn price_from_legs(legs: &[LegValue], spec: &SwapSpec) -> f64 {
    let v: f64 = legs.iter().map(|l| l.value(spec.fixed_rate)).sum();
    spec.notional * spec.side.sign() * v
}

/// Fixed rate that zeroes the value of the remaining legs.
pub fn forward_swap_rate(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    tenor: &TenorStructure,
    collateral: &CollateralFraction,
    history: Option<&dyn RealizedHistory>,
) -> Result<f64> {
    let legs = swap_legs(model, x_t, t, tenor, collateral, history)?;
    fair_rate_from_legs(&legs)
}

pub fn fair_rate_from_legs(legs: &[LegValue]) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for l in legs {
        num += l.floating - l.discount;
        den += l.delta * l.discount;
    }
    if den <= 0.0 {
        return Err(Error::Domain("no live legs left".into()));
    }
    Ok(num / den)
}

/// Single-period price written through the futures rate:
/// `A^beta e^rho (Y e^{(w^2(t,T) - v_Y^2)/2} - (1 + delta kappa) e^{w^2(t,U)/2})`.
pub fn swap_price_futures_repr(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    state: &FuturesState,
    spec: &SwapSpec,
) -> Result<f64> {
    if spec.tenor.n_periods() != 1 {
        return Err(Error::Unsupported("futures representation covers single-period swaps only".into()));
    }
    let per = spec.tenor.period(1);
    if t > per.end + TIME_EPS {
        return Err(Error::Domain(format!("swap settled at {} before t = {t}", per.end)));
    }
    let t = t.min(per.end);
    let p = &model.factor;
    let beta_basis = model.beta_basis(&spec.collateral)?;
    let (tt, u) = (per.start, per.end);
    let delta = per.delta();
    let a_beta = (-beta_basis.integral(t, u)).exp();
    let rho = -p.n(u - t) * x_t - p.a * int_n(p.b, u - t);
    let w2_t = p.w2(tt - t);
    let w2_u = p.w2(u - t);
    let contract = crate::futures::FuturesContract::new(per);
    let v2 = crate::futures::accumulated_variance(&contract, t, u, p)?;
    let y = state.y(delta);
    let unit = a_beta * rho.exp() * (y * (0.5 * (w2_t - v2)).exp() - (1.0 + delta * spec.fixed_rate) * (0.5 * w2_u).exp());
    Ok(spec.notional * spec.side.sign() * unit)
}
