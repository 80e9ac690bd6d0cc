//! Single-curve LIBOR-style quantities from a discount curve.

use crate::curves::{synthetic_bond, Discounting, MarketModel};
use crate::error::{Error, Result};
use crate::futures::Period;
use crate::swaps::TenorStructure;

/// Bond prices `B(t, T)` seen from a fixed valuation time `t`.
pub trait DiscountCurve {
    fn valuation_time(&self) -> f64;
    fn bond(&self, maturity: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatCurve {
    pub t: f64,
    pub rate: f64,
}

impl DiscountCurve for FlatCurve {
    fn valuation_time(&self) -> f64 {
        self.t
    }

    fn bond(&self, maturity: f64) -> Result<f64> {
        Ok((-self.rate * (maturity - self.t)).exp())
    }
}

/// Synthetic bonds of the model at state `x_t`.
#[derive(Debug, Clone)]
pub struct ModelCurve<'a> {
    pub model: &'a MarketModel,
    pub discounting: Discounting,
    pub x_t: f64,
    pub t: f64,
}

impl DiscountCurve for ModelCurve<'_> {
    fn valuation_time(&self) -> f64 {
        self.t
    }

    fn bond(&self, maturity: f64) -> Result<f64> {
        synthetic_bond(self.model, &self.discounting, self.x_t, self.t, maturity, None)
    }
}

/// Bond prices on an explicit set of maturities.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    pub t: f64,
    pub points: Vec<(f64, f64)>,
}

impl DiscountCurve for TabulatedCurve {
    fn valuation_time(&self) -> f64 {
        self.t
    }

    fn bond(&self, maturity: f64) -> Result<f64> {
        self.points
            .iter()
            .find(|(m, _)| (m - maturity).abs() < 1e-12)
            .map(|&(_, b)| b)
            .ok_or_else(|| Error::InvalidInput(format!("no bond quoted for maturity {maturity}")))
    }
}

fn check_start(curve: &dyn DiscountCurve, first: f64) -> Result<()> {
    if curve.valuation_time() > first + 1e-12 {
        return Err(Error::Domain("valuation after the first fixing".into()));
    }
    Ok(())
}

pub fn forward_libor(curve: &dyn DiscountCurve, period: Period) -> Result<f64> {
    check_start(curve, period.start)?;
    Ok((curve.bond(period.start)? / curve.bond(period.end)? - 1.0) / period.delta())
}

/// Payer swap value per unit notional, summed leg by leg.
pub fn libor_swap_price(curve: &dyn DiscountCurve, tenor: &TenorStructure, kappa: f64) -> Result<f64> {
    check_start(curve, tenor.first())?;
    let mut v = 0.0;
    for p in tenor.periods() {
        v += curve.bond(p.start)? - (1.0 + p.delta() * kappa) * curve.bond(p.end)?;
    }
    Ok(v)
}

/// `sum_j delta_j B(t, T_j)`.
pub fn annuity(curve: &dyn DiscountCurve, tenor: &TenorStructure) -> Result<f64> {
    let mut a = 0.0;
    for p in tenor.periods() {
        a += p.delta() * curve.bond(p.end)?;
    }
    Ok(a)
}

/// `(B(t,T_0) - B(t,T_n)) / sum_j delta_j B(t,T_j)`.
pub fn libor_swap_rate(curve: &dyn DiscountCurve, tenor: &TenorStructure) -> Result<f64> {
    check_start(curve, tenor.first())?;
    Ok((curve.bond(tenor.first())? - curve.bond(tenor.last())?) / annuity(curve, tenor)?)
}

/// Mark-to-market `sum_j delta_j B(t,T_j) (kappa_t - kappa)`.
pub fn libor_swap_mtm(curve: &dyn DiscountCurve, tenor: &TenorStructure, kappa: f64) -> Result<f64> {
    Ok(annuity(curve, tenor)? * (libor_swap_rate(curve, tenor)? - kappa))
}
