//! SOFR futures: futures rate before and inside the reference period, its
//! lognormal volatility and accumulated variance.

use crate::curves::{Discounting, MarketModel, RateLabel};
use crate::error::{domain, Error, Result};
use crate::vasicek::{int_exp2, int_n2, integrated_factor_law, n_tau, FactorParams, TIME_EPS};
use serde::{Deserialize, Serialize};

/// Reference period `[T, T + delta]` in model time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub start: f64,
    pub end: f64,
}

impl Period {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start >= end {
            return domain(format!("period needs start < end, got [{start}, {end}]"));
        }
        Ok(Period { start, end })
    }

    pub fn delta(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.start && t <= self.end + TIME_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuturesStyle {
    #[default]
    ThreeMonthCompound,
    /// Display only; the closed forms target compound contracts.
    OneMonthSimple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuturesContract {
    pub period: Period,
    pub style: FuturesStyle,
}

impl FuturesContract {
    pub fn new(period: Period) -> Self {
        FuturesContract { period, style: FuturesStyle::ThreeMonthCompound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuturesState {
    pub rate: f64,
    /// Realized `int_T^t r^s du`, zero before the period starts.
    pub accrued: f64,
}

impl FuturesState {
    pub fn price(&self) -> f64 {
        1.0 - self.rate
    }

    /// `Y_t = 1 + delta R_t`.
    pub fn y(&self, delta: f64) -> f64 {
        1.0 + delta * self.rate
    }
}

/// Futures rate at `t` given the factor `x_t` and, inside the period, the
/// realized SOFR integral since the period start.
pub fn futures_rate(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    contract: &FuturesContract,
    accrued: Option<f64>,
) -> Result<f64> {
    Ok(futures_state(model, x_t, t, contract, accrued)?.rate)
}

pub fn futures_state(
    model: &MarketModel,
    x_t: f64,
    t: f64,
    contract: &FuturesContract,
    accrued: Option<f64>,
) -> Result<FuturesState> {
    let Period { start, end } = contract.period;
    let delta = contract.period.delta();
    if t > end + TIME_EPS {
        return domain(format!("futures on [{start}, {end}] already settled at t = {t}"));
    }
    let p = &model.factor;
    let alpha_s = &model.s;
    let (log_y, acc) = if t <= start {
        let law = integrated_factor_law(x_t, t, start, end, p)?;
        (alpha_s.integral(start, end) + law.mean + 0.5 * law.variance, 0.0)
    } else {
        let acc = accrued.ok_or_else(|| {
            Error::MissingHistory(format!("t = {t} is inside [{start}, {end}]; realized accrual required"))
        })?;
        let t = t.min(end);
        let law = integrated_factor_law(x_t, t, t, end, p)?;
        (acc + alpha_s.integral(t, end) + law.mean + 0.5 * law.variance, acc)
    };
    Ok(FuturesState { rate: log_y.exp_m1() / delta, accrued: acc })
}

/// `sigma^Y_t`: `sigma (n(t,U) - n(t,T))` before `T`, `sigma n(t,U)` inside.
pub fn futures_vol(contract: &FuturesContract, t: f64, params: &FactorParams) -> Result<f64> {
    let Period { start, end } = contract.period;
    if t > end + TIME_EPS {
        return domain(format!("t = {t} after settlement {end}"));
    }
    let t = t.min(end);
    let b = params.b;
    Ok(if t <= start {
        params.sigma * (-b * (start - t)).exp() * n_tau(b, end - start)
    } else {
        params.sigma * n_tau(b, end - t)
    })
}

/// `v_Y^2(t, horizon) = int_t^horizon (sigma^Y_u)^2 du`.
pub fn accumulated_variance(contract: &FuturesContract, t: f64, horizon: f64, params: &FactorParams) -> Result<f64> {
    let Period { start, end } = contract.period;
    if t > horizon + TIME_EPS || horizon > end + TIME_EPS {
        return domain(format!("need t <= horizon <= {end}, got t = {t}, horizon = {horizon}"));
    }
    let horizon = horizon.min(end);
    let b = params.b;
    let s2 = params.sigma * params.sigma;
    let mut v = 0.0;
    let (t1, t2) = (t, horizon.min(start));
    if t2 > t1 {
        let n = n_tau(b, end - start);
        v += s2 * n * n * (-2.0 * b * (start - t2)).exp() * int_exp2(b, t2 - t1);
    }
    let (s1, s2_) = (t.max(start), horizon);
    if s2_ > s1 {
        v += s2 * (int_n2(b, end - s1) - int_n2(b, end - s2_));
    }
    Ok(v.max(0.0))
}

/// Futures rate minus the forward rate implied by synthetic SOFR bonds.
pub fn convexity_correction(model: &MarketModel, x_t: f64, t: f64, contract: &FuturesContract) -> Result<f64> {
    let Period { start, end } = contract.period;
    if t > start + TIME_EPS {
        return domain("convexity correction is defined before the period starts");
    }
    let d = Discounting::Rate(RateLabel::Sofr);
    let b_t = crate::curves::synthetic_bond(model, &d, x_t, t, start, None)?;
    let b_u = crate::curves::synthetic_bond(model, &d, x_t, t, end, None)?;
    let fwd = (b_t / b_u - 1.0) / contract.period.delta();
    Ok(futures_rate(model, x_t, t, contract, None)? - fwd)
}

/// Rate rounded to a tenth of a basis point, as used for final settlement.
pub fn display_rate(rate: f64) -> f64 {
    (rate * 1e5).round() / 1e5
}

/// Final settlement price per unit notional: `1 - rounded rate`.
pub fn settlement_price(rate: f64) -> f64 {
    1.0 - display_rate(rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FactorParams {
        FactorParams::new(0.02, 0.3, 0.01, 0.03).unwrap()
    }

    #[test]
    fn vol_continuity_and_limits() {
        let c = FuturesContract::new(Period::new(0.5, 0.75).unwrap());
        let p = params();
        let pre = futures_vol(&c, 0.5, &p).unwrap();
        let post = futures_vol(&c, 0.5 + 1e-15, &p).unwrap();
        assert!((pre - post).abs() < 1e-15);
        assert_eq!(futures_vol(&c, 0.75, &p).unwrap(), 0.0);
        let p0 = FactorParams::new(0.02, 0.0, 0.01, 0.03).unwrap();
        for t in [0.0, 0.2, 0.5] {
            assert!((futures_vol(&c, t, &p0).unwrap() - 0.01 * 0.25).abs() < 1e-16);
        }
    }

    #[test]
    fn variance_matches_law() {
        let c = FuturesContract::new(Period::new(0.5, 0.75).unwrap());
        let p = params();
        for t in [0.0, 0.3, 0.5, 0.6, 0.75] {
            let v = accumulated_variance(&c, t, 0.75, &p).unwrap();
            let (tt, uu) = (t.max(0.5), 0.75);
            let law = integrated_factor_law(0.0, t, tt, uu, &p).unwrap();
            let expect = if t <= 0.5 { law.variance } else { p.w2(0.75 - t) };
            assert!((v - expect).abs() < 1e-18, "{t}: {v} vs {expect}");
        }
        assert_eq!(accumulated_variance(&c, 0.75, 0.75, &p).unwrap(), 0.0);
    }

    #[test]
    fn settlement_display() {
        assert!((settlement_price(0.0104123) - 0.98959).abs() < 1e-15);
        assert_eq!(display_rate(0.053149), 0.05315);
    }
}
