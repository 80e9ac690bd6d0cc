//! Basis curves, the market model and realized rate paths.

use crate::error::{domain, Error, Result};
use crate::vasicek::{zcb_kernel, FactorParams, TIME_EPS};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateLabel {
    /// SOFR, `r^s`.
    #[serde(alias = "s")]
    Sofr,
    /// EFFR, `r^e`.
    #[serde(alias = "e")]
    Effr,
    /// Unsecured term rate, `r^u`.
    #[serde(alias = "u")]
    Unsecured,
    /// Collateral remuneration rate, `r^c`.
    #[serde(alias = "c")]
    Collateral,
    /// Hedge funding rate, `r^h`.
    #[serde(alias = "h")]
    Funding,
}

impl RateLabel {
    pub const ALL: [RateLabel; 5] =
        [RateLabel::Sofr, RateLabel::Effr, RateLabel::Unsecured, RateLabel::Collateral, RateLabel::Funding];

    pub fn symbol(self) -> &'static str {
        match self {
            RateLabel::Sofr => "s",
            RateLabel::Effr => "e",
            RateLabel::Unsecured => "u",
            RateLabel::Collateral => "c",
            RateLabel::Funding => "h",
        }
    }
}

impl fmt::Display for RateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Right-continuous step function. `values[i]` holds on `[knots[i], knots[i+1])`;
/// the first value extends to the left and the last one to the right.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    knots: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "need equally many knots and values (got {} and {})",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite knot or value".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("knots must be strictly increasing".into()));
        }
        let mut cumulative = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..knots.len() {
            acc += (knots[i] - knots[i - 1]) * values[i - 1];
            cumulative.push(acc);
        }
        Ok(PiecewiseConstant { knots, values, cumulative })
    }

    pub fn constant(value: f64) -> Self {
        PiecewiseConstant { knots: vec![0.0], values: vec![value], cumulative: vec![0.0] }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, t: f64) -> usize {
        self.knots.partition_point(|&k| k <= t).saturating_sub(1)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.values[self.segment(t)]
    }

    fn antiderivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.cumulative[i] + (t - self.knots[i]) * self.values[i]
    }

    /// Exact signed integral over `[t0, t1]`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t0 == t1 {
            return 0.0;
        }
        if self.knots.len() == 1 {
            return (t1 - t0) * self.values[0];
        }
        self.antiderivative(t1) - self.antiderivative(t0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        PiecewiseConstant::new(self.knots.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination on the merged knot set.
    pub fn zip_with(&self, other: &PiecewiseConstant, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut knots: Vec<f64> = self.knots.iter().chain(&other.knots).copied().collect();
        knots.sort_by(|a, b| a.total_cmp(b));
        knots.dedup();
        let values = knots.iter().map(|&k| f(self.value_at(k), other.value_at(k))).collect();
        PiecewiseConstant::new(knots, values)
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// Deterministic spread `alpha` of one overnight rate over the factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisCurve {
    pub label: Option<RateLabel>,
    curve: PiecewiseConstant,
}

impl BasisCurve {
    pub fn new(label: Option<RateLabel>, knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(BasisCurve { label, curve: PiecewiseConstant::new(knots, values)? })
    }

    pub fn constant(label: Option<RateLabel>, value: f64) -> Self {
        BasisCurve { label, curve: PiecewiseConstant::constant(value) }
    }

    pub fn zero(label: Option<RateLabel>) -> Self {
        Self::constant(label, 0.0)
    }

    pub fn from_curve(label: Option<RateLabel>, curve: PiecewiseConstant) -> Self {
        BasisCurve { label, curve }
    }

    pub fn curve(&self) -> &PiecewiseConstant {
        &self.curve
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.curve.value_at(t)
    }

    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        self.curve.integral(t0, t1)
    }

    /// `alpha_self - alpha_other`, unlabeled.
    pub fn minus(&self, other: &BasisCurve) -> Result<BasisCurve> {
        Ok(BasisCurve { label: None, curve: self.curve.zip_with(&other.curve, |a, b| a - b)? })
    }
}

/// Deterministic collateral fraction `beta(t)` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollateralFraction(PiecewiseConstant);

impl CollateralFraction {
    pub fn new(curve: PiecewiseConstant) -> Result<Self> {
        if curve.values().iter().any(|&b| !(0.0..=1.0).contains(&b)) {
            return domain("collateral fraction must lie in [0, 1]");
        }
        Ok(CollateralFraction(curve))
    }

    pub fn constant(beta: f64) -> Result<Self> {
        Self::new(PiecewiseConstant::constant(beta))
    }

    pub fn none() -> Self {
        CollateralFraction(PiecewiseConstant::constant(0.0))
    }

    pub fn full() -> Self {
        CollateralFraction(PiecewiseConstant::constant(1.0))
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.0.value_at(t)
    }

    pub fn curve(&self) -> &PiecewiseConstant {
        &self.0
    }
}

impl Default for CollateralFraction {
    fn default() -> Self {
        Self::none()
    }
}

/// `alpha^beta = (1 - beta) alpha^h + beta alpha^c`.
pub fn effective_basis(beta: &CollateralFraction, h_basis: &BasisCurve, c_basis: &BasisCurve) -> Result<BasisCurve> {
    let mut knots: Vec<f64> =
        beta.0.knots().iter().chain(h_basis.curve.knots()).chain(c_basis.curve.knots()).copied().collect();
    knots.sort_by(|a, b| a.total_cmp(b));
    knots.dedup();
    let values = knots
        .iter()
        .map(|&k| {
            let b = beta.value_at(k);
            (1.0 - b) * h_basis.value_at(k) + b * c_basis.value_at(k)
        })
        .collect();
    BasisCurve::new(None, knots, values)
}

/// What a cash flow is discounted with.
#[derive(Debug, Clone, PartialEq)]
pub enum Discounting {
    Rate(RateLabel),
    Collateralized(CollateralFraction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    pub factor: FactorParams,
    pub s: BasisCurve,
    pub e: BasisCurve,
    pub u: BasisCurve,
    pub c: BasisCurve,
    pub h: BasisCurve,
    pub collateral: CollateralFraction,
}

impl MarketModel {
    pub fn new(
        factor: FactorParams,
        bases: [BasisCurve; 5],
        collateral: CollateralFraction,
    ) -> Result<Self> {
        factor.validate()?;
        let [s, e, u, c, h] = bases;
        let mut m = MarketModel { factor, s, e, u, c, h, collateral };
        for label in RateLabel::ALL {
            m.basis_mut(label).label = Some(label);
        }
        Ok(m)
    }

    /// Constant bases in the order `s, e, u, c, h`.
    pub fn flat(factor: FactorParams, alphas: [f64; 5]) -> Result<Self> {
        let bases = alphas.map(|a| BasisCurve::constant(None, a));
        Self::new(factor, bases, CollateralFraction::none())
    }

    pub fn basis(&self, label: RateLabel) -> &BasisCurve {
        match label {
            RateLabel::Sofr => &self.s,
            RateLabel::Effr => &self.e,
            RateLabel::Unsecured => &self.u,
            RateLabel::Collateral => &self.c,
            RateLabel::Funding => &self.h,
        }
    }

    fn basis_mut(&mut self, label: RateLabel) -> &mut BasisCurve {
        match label {
            RateLabel::Sofr => &mut self.s,
            RateLabel::Effr => &mut self.e,
            RateLabel::Unsecured => &mut self.u,
            RateLabel::Collateral => &mut self.c,
            RateLabel::Funding => &mut self.h,
        }
    }

    pub fn beta_basis(&self, beta: &CollateralFraction) -> Result<BasisCurve> {
        effective_basis(beta, &self.h, &self.c)
    }

    pub fn discount_basis(&self, which: &Discounting) -> Result<BasisCurve> {
        match which {
            Discounting::Rate(l) => Ok(self.basis(*l).clone()),
            Discounting::Collateralized(beta) => self.beta_basis(beta),
        }
    }

    pub fn with_factor(&self, factor: FactorParams) -> Self {
        MarketModel { factor, ..self.clone() }
    }
}

/// Price at `t` of the synthetic bond paying one at `big_t`. For `t > big_t` the
/// accrual `exp(int_T^t r du)` is read from `history`.
pub fn synthetic_bond(
    model: &MarketModel,
    which: &Discounting,
    x_t: f64,
    t: f64,
    big_t: f64,
    history: Option<&dyn RealizedHistory>,
) -> Result<f64> {
    let basis = model.discount_basis(which)?;
    if t <= big_t + TIME_EPS {
        return zcb_kernel(x_t, t, big_t, &model.factor, &basis);
    }
    let hist = history.ok_or_else(|| {
        Error::MissingHistory(format!("bond matured at {big_t} needs realized rates up to {t}"))
    })?;
    Ok((hist.factor_integral(big_t, t)? + basis.integral(big_t, t)).exp())
}

/// Access to realized `int x du` over past intervals.
pub trait RealizedHistory: Sync {
    fn factor_integral(&self, from: f64, to: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationScheme {
    #[default]
    LeftRiemann,
    Trapezoid,
    /// Uses the stored exact integral increments.
    Exact,
}

/// Factor values on a grid, optionally with exact `int x du` per grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePath {
    pub times: Vec<f64>,
    pub factor: Vec<f64>,
    pub increments: Option<Vec<f64>>,
}

impl RatePath {
    pub fn new(times: Vec<f64>, factor: Vec<f64>, increments: Option<Vec<f64>>) -> Result<Self> {
        if times.len() != factor.len() || times.is_empty() {
            return Err(Error::InvalidInput("path times and factor values differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("path grid must be strictly increasing".into()));
        }
        if let Some(inc) = &increments {
            if inc.len() + 1 != times.len() {
                return Err(Error::InvalidInput("need one increment per grid step".into()));
            }
        }
        Ok(RatePath { times, factor, increments })
    }

    /// Grid index of `t`, if `t` is a grid point.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = TIME_EPS * t.abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }

    fn index_or_err(&self, t: f64) -> Result<usize> {
        self.index_of(t)
            .ok_or_else(|| Error::Coverage(format!("time {t} is not on the path grid")))
    }

    pub fn factor_at(&self, t: f64) -> Result<f64> {
        Ok(self.factor[self.index_or_err(t)?])
    }

    /// Realized short rate `x + alpha` of `label` at grid index `i`.
    pub fn short_rate(&self, model: &MarketModel, label: RateLabel, i: usize) -> f64 {
        self.factor[i] + model.basis(label).value_at(self.times[i])
    }

    /// `int_{t0}^{t1} x du` under `scheme`.
    pub fn integrate_factor(&self, t0: f64, t1: f64, scheme: IntegrationScheme) -> Result<f64> {
        if t1 < t0 {
            return Ok(-self.integrate_factor(t1, t0, scheme)?);
        }
        let (i0, i1) = (self.index_or_err(t0)?, self.index_or_err(t1)?);
        let mut acc = 0.0;
        match scheme {
            IntegrationScheme::Exact => {
                let inc = self.increments.as_ref().ok_or_else(|| {
                    Error::InvalidInput("exact scheme needs stored integral increments".into())
                })?;
                for v in &inc[i0..i1] {
                    acc += v;
                }
            }
            IntegrationScheme::LeftRiemann => {
                for k in i0..i1 {
                    acc += self.factor[k] * (self.times[k + 1] - self.times[k]);
                }
            }
            IntegrationScheme::Trapezoid => {
                for k in i0..i1 {
                    acc += 0.5 * (self.factor[k] + self.factor[k + 1]) * (self.times[k + 1] - self.times[k]);
                }
            }
        }
        Ok(acc)
    }
}

impl RealizedHistory for RatePath {
    fn factor_integral(&self, from: f64, to: f64) -> Result<f64> {
        let scheme = if self.increments.is_some() {
            IntegrationScheme::Exact
        } else {
            IntegrationScheme::Trapezoid
        };
        self.integrate_factor(from, to, scheme)
    }
}

/// `exp(int_{t0}^{t1} r du)` for the realized rate `which`. The basis part is integrated exactly.
pub fn account_growth(
    path: &RatePath,
    model: &MarketModel,
    which: &Discounting,
    t0: f64,
    t1: f64,
    scheme: IntegrationScheme,
) -> Result<f64> {
    if t0 == t1 {
        return Ok(1.0);
    }
    let basis = model.discount_basis(which)?;
    Ok((path.integrate_factor(t0, t1, scheme)? + basis.integral(t0, t1)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> MarketModel {
        MarketModel::flat(FactorParams::new(0.02, 0.3, 0.01, 0.03).unwrap(), [-0.0005, 0.0, 0.003, 0.0, 0.001])
            .unwrap()
    }

    #[test]
    fn piecewise_integral_is_exact() {
        let c = PiecewiseConstant::new(vec![0.0, 1.0, 2.5], vec![0.01, 0.02, -0.01]).unwrap();
        assert_eq!(c.value_at(-3.0), 0.01);
        assert_eq!(c.value_at(1.0), 0.02);
        assert_eq!(c.value_at(2.4999), 0.02);
        assert_eq!(c.value_at(9.0), -0.01);
        let v = c.integral(0.5, 3.0);
        assert!((v - (0.5 * 0.01 + 1.5 * 0.02 - 0.5 * 0.01)).abs() < 1e-17);
        assert_eq!(c.integral(3.0, 0.5), -v);
        assert!((c.integral(-1.0, 0.0) - 0.01).abs() < 1e-17);
    }

    #[test]
    fn piecewise_rejects_bad_knots() {
        assert!(PiecewiseConstant::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(PiecewiseConstant::new(vec![], vec![]).is_err());
        assert!(PiecewiseConstant::new(vec![0.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn effective_basis_examples() {
        let h = BasisCurve::new(None, vec![0.0, 1.0], vec![0.002, 0.004]).unwrap();
        let c = BasisCurve::constant(None, -0.001);
        let b0 = effective_basis(&CollateralFraction::none(), &h, &c).unwrap();
        let b1 = effective_basis(&CollateralFraction::full(), &h, &c).unwrap();
        for &t in &[-1.0, 0.0, 0.5, 1.0, 7.0] {
            assert_eq!(b0.value_at(t), h.value_at(t));
            assert_eq!(b1.value_at(t), c.value_at(t));
        }
        let half = effective_basis(
            &CollateralFraction::constant(0.5).unwrap(),
            &BasisCurve::constant(None, 0.002),
            &BasisCurve::zero(None),
        )
        .unwrap();
        assert_eq!(half.value_at(3.0), 0.001);
        assert!(CollateralFraction::constant(1.5).is_err());
    }

    #[test]
    fn bond_needs_history_after_maturity() {
        let m = model();
        let d = Discounting::Rate(RateLabel::Funding);
        assert_eq!(synthetic_bond(&m, &d, 0.03, 1.0, 1.0, None).unwrap(), 1.0);
        assert!(matches!(synthetic_bond(&m, &d, 0.03, 1.5, 1.0, None), Err(Error::MissingHistory(_))));
        let path = RatePath::new(vec![0.0, 1.0, 1.5], vec![0.03, 0.03, 0.03], None).unwrap();
        let g = synthetic_bond(&m, &d, 0.03, 1.5, 1.0, Some(&path)).unwrap();
        assert!((g - (0.5f64 * 0.031).exp()).abs() < 1e-15);
    }

    #[test]
    fn account_growth_constant_rate() {
        let m = model();
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let path = RatePath::new(times.clone(), vec![0.04; 11], None).unwrap();
        let d = Discounting::Rate(RateLabel::Sofr);
        for scheme in [IntegrationScheme::LeftRiemann, IntegrationScheme::Trapezoid] {
            let g = account_growth(&path, &m, &d, 0.0, 1.0, scheme).unwrap();
            assert!((g - (0.0395f64).exp()).abs() < 1e-14);
            assert_eq!(account_growth(&path, &m, &d, 0.3, 0.3, scheme).unwrap(), 1.0);
        }
        assert!(account_growth(&path, &m, &d, 0.0, 0.55, IntegrationScheme::LeftRiemann).is_err());
    }
}
