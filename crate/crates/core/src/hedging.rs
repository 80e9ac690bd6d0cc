//! Futures hedge ratios and a discrete self-financing wealth simulator.
//!
//! Positions are expressed in futures contracts per unit of price `f = 1 - R`,
//! and the cash leg as `phi0 * B^h_t` (money held in the funding account).

use crate::curves::{CollateralFraction, IntegrationScheme, MarketModel, RatePath};
use crate::error::{Error, Result};
use crate::futures::{futures_state, FuturesContract, FuturesState};
use crate::mc::simulate_path;
use crate::normal::cdf;
use crate::options::{caplet_components, CapletSpec};
use crate::swaps::{legs_with, price_from_legs, LegContext, LegValue, SwapSpec};
use crate::vasicek::TIME_EPS;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeRatios {
    /// Money in the funding account, `phi0_t B^h_t`.
    pub phi0_cash: f64,
    /// Futures positions, one per contract.
    pub phi_futures: Vec<f64>,
    pub valid_at: f64,
}

/// What a hedger sees at time `t`: the funding rate and the futures quotes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub t: f64,
    pub funding_rate: f64,
    pub futures: Vec<FuturesState>,
}

impl Observation {
    /// Factor level recovered as `r^h_t - alpha^h(t)`.
    pub fn factor(&self, model: &MarketModel) -> f64 {
        self.funding_rate - model.h.value_at(self.t)
    }
}

fn leg_values(model: &MarketModel, ctx: &LegContext, x_t: f64, t: f64, spec: &SwapSpec, states: &[FuturesState]) -> Result<Vec<LegValue>> {
    if states.len() != spec.tenor.n_periods() {
        return Err(Error::InvalidInput(format!(
            "need one futures state per swap period ({} vs {})",
            states.len(),
            spec.tenor.n_periods()
        )));
    }
    legs_with(model, ctx, x_t, t, &spec.tenor, |j, _| Ok(states[j - 1].accrued))
}

/// Replicating positions for a (possibly collateralized) multi-period swap.
/// `states[j-1]` is the quote of the futures on period `j`.
pub fn swap_hedge(model: &MarketModel, x_t: f64, t: f64, spec: &SwapSpec, states: &[FuturesState]) -> Result<HedgeRatios> {
    let ctx = LegContext::new(model, &spec.collateral)?;
    let legs = leg_values(model, &ctx, x_t, t, spec, states)?;
    let p = &model.factor;
    let scale = spec.notional * spec.side.sign();
    let mut phi = vec![0.0; spec.tenor.n_periods()];
    for leg in &legs {
        let y = states[leg.index - 1].y(leg.delta);
        let fixed = 1.0 + leg.delta * spec.fixed_rate;
        phi[leg.index - 1] = if leg.in_period {
            -scale * fixed * leg.discount * leg.delta / y
        } else {
            let n_end = p.n(leg.end - t);
            let n_start = p.n(leg.start - t);
            -scale * leg.delta * (fixed * leg.discount * n_end - leg.floating * n_start) / (y * (n_end - n_start))
        };
    }
    let value = price_from_legs(&legs, spec);
    let beta = spec.collateral.value_at(t);
    Ok(HedgeRatios { phi0_cash: (1.0 - beta) * value, phi_futures: phi, valid_at: t })
}

/// Replicating positions for a caplet, hedged with the futures on its own period.
pub fn caplet_hedge(model: &MarketModel, x_t: f64, t: f64, spec: &CapletSpec, state: &FuturesState) -> Result<HedgeRatios> {
    let per = spec.period;
    if t > per.end + TIME_EPS {
        return Err(Error::Domain("caplet already settled".into()));
    }
    let c = caplet_components(model, x_t, t, spec, state)?;
    let p = &model.factor;
    let n_hat = if t < per.start {
        let n_end = p.n(per.end - t);
        n_end / (n_end - p.n(per.start - t))
    } else {
        1.0
    };
    // With no remaining variance the exercise indicator replaces N(h+).
    let n_plus = if c.v_y > 0.0 { cdf(c.h_plus) } else if c.c1 > c.c2 { 1.0 } else { 0.0 };
    let phi = -spec.notional * per.delta() * (c.c1 * n_plus - c.unit_price * n_hat) / c.y;
    let beta = spec.collateral.value_at(t);
    Ok(HedgeRatios { phi0_cash: (1.0 - beta) * c.price, phi_futures: vec![phi], valid_at: t })
}

pub trait HedgeStrategy: Sync {
    fn ratios(&self, obs: &Observation) -> Result<HedgeRatios>;
}

impl<F> HedgeStrategy for F
where
    F: Fn(&Observation) -> Result<HedgeRatios> + Sync,
{
    fn ratios(&self, obs: &Observation) -> Result<HedgeRatios> {
        self(obs)
    }
}

/// A contract whose value the hedger tracks and whose cash flows it pays.
pub trait Target: Sync {
    /// Value at `obs.t`, including any cash flow due exactly at `obs.t`.
    fn value(&self, obs: &Observation) -> Result<f64>;
    /// Cash flow due at `obs.t` (zero off payment dates).
    fn cashflow(&self, obs: &Observation) -> Result<f64>;
}

#[derive(Debug, Clone)]
pub struct SwapReplication<'a> {
    pub model: &'a MarketModel,
    pub spec: SwapSpec,
}

impl SwapReplication<'_> {
    pub fn contracts(&self) -> Vec<FuturesContract> {
        self.spec.tenor.periods().map(FuturesContract::new).collect()
    }
}

impl HedgeStrategy for SwapReplication<'_> {
    fn ratios(&self, obs: &Observation) -> Result<HedgeRatios> {
        swap_hedge(self.model, obs.factor(self.model), obs.t, &self.spec, &obs.futures)
    }
}

impl Target for SwapReplication<'_> {
    fn value(&self, obs: &Observation) -> Result<f64> {
        let ctx = LegContext::new(self.model, &self.spec.collateral)?;
        let legs = leg_values(self.model, &ctx, obs.factor(self.model), obs.t, &self.spec, &obs.futures)?;
        Ok(price_from_legs(&legs, &self.spec))
    }

    fn cashflow(&self, obs: &Observation) -> Result<f64> {
        let mut cf = 0.0;
        for (j, per) in self.spec.tenor.periods().enumerate() {
            if (obs.t - per.end).abs() <= TIME_EPS {
                cf += per.delta() * (obs.futures[j].rate - self.spec.fixed_rate);
            }
        }
        Ok(self.spec.notional * self.spec.side.sign() * cf)
    }
}

#[derive(Debug, Clone)]
pub struct CapletReplication<'a> {
    pub model: &'a MarketModel,
    pub spec: CapletSpec,
}

impl CapletReplication<'_> {
    pub fn contracts(&self) -> Vec<FuturesContract> {
        vec![FuturesContract::new(self.spec.period)]
    }
}

impl HedgeStrategy for CapletReplication<'_> {
    fn ratios(&self, obs: &Observation) -> Result<HedgeRatios> {
        caplet_hedge(self.model, obs.factor(self.model), obs.t, &self.spec, &obs.futures[0])
    }
}

impl Target for CapletReplication<'_> {
    fn value(&self, obs: &Observation) -> Result<f64> {
        Ok(caplet_components(self.model, obs.factor(self.model), obs.t, &self.spec, &obs.futures[0])?.price)
    }

    fn cashflow(&self, obs: &Observation) -> Result<f64> {
        let per = self.spec.period;
        if (obs.t - per.end).abs() > TIME_EPS {
            return Ok(0.0);
        }
        Ok(self.spec.notional * per.delta() * (obs.futures[0].rate - self.spec.strike).max(0.0))
    }
}

/// Quotes of `contracts` at grid index `i`; contracts past settlement keep their final quote.
pub fn observe(model: &MarketModel, path: &RatePath, i: usize, contracts: &[FuturesContract]) -> Result<Observation> {
    let t = path.times[i];
    let x = path.factor[i];
    let mut futures = Vec::with_capacity(contracts.len());
    for c in contracts {
        let per = c.period;
        let state = if t <= per.start {
            futures_state(model, x, t, c, None)?
        } else {
            let te = t.min(per.end);
            let acc = path.integrate_factor(per.start, te, IntegrationScheme::Exact)? + model.s.integral(per.start, te);
            let xe = path.factor_at(te)?;
            futures_state(model, xe, te, c, Some(acc))?
        };
        futures.push(state);
    }
    Ok(Observation { t, funding_rate: x + model.h.value_at(t), futures })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    /// Wealth before any cash flow due at `t` is paid.
    pub wealth: f64,
    pub portfolio: f64,
    pub collateral: f64,
    /// Units of the funding account.
    pub phi0: f64,
    pub phi: Vec<f64>,
    pub target: Option<f64>,
    pub error: Option<f64>,
    pub futures_pnl: f64,
    pub funding_interest: f64,
    pub collateral_interest: f64,
    pub cashflow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WealthLedger {
    pub rows: Vec<LedgerRow>,
    /// Wealth after the last cash flow; zero under perfect replication.
    pub terminal_wealth: f64,
    pub max_abs_error: Option<f64>,
}

impl WealthLedger {
    pub fn csv_header(n_phi: usize) -> String {
        let mut h = String::from("t,V,Vp,C,phi0");
        for j in 1..=n_phi {
            h.push_str(&format!(",phi{j}"));
        }
        h.push_str(",target,error");
        h
    }

    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.phi.len());
        let mut out = Self::csv_header(n);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!("{:.10},{:.12e},{:.12e},{:.12e},{:.12e}", r.t, r.wealth, r.portfolio, r.collateral, r.phi0));
            for p in &r.phi {
                out.push_str(&format!(",{p:.12e}"));
            }
            out.push_str(&format!(",{},{}\n", opt(r.target), opt(r.error)));
        }
        out
    }
}

pub struct WealthInputs<'a> {
    pub model: &'a MarketModel,
    pub path: &'a RatePath,
    pub strategy: &'a dyn HedgeStrategy,
    pub contracts: &'a [FuturesContract],
    pub collateral: &'a CollateralFraction,
    pub initial_wealth: f64,
    /// Rebalance every `stride` grid steps.
    pub stride: usize,
    pub target: Option<&'a dyn Target>,
    /// Stop after this time (defaults to the end of the path).
    pub horizon: Option<f64>,
}

/// Runs the self-financing recursion
/// `V' = V ((1 - beta) G^h + beta G^c) + sum phi (f' - f)` with exact account growth
/// `G` over each rebalancing interval, posting collateral `C = -beta V`.
pub fn simulate_wealth(inp: &WealthInputs<'_>) -> Result<WealthLedger> {
    let WealthInputs { model, path, strategy, contracts, collateral, initial_wealth, stride, target, horizon } = *inp;
    if stride == 0 {
        return Err(Error::InvalidInput("rebalancing stride must be >= 1".into()));
    }
    let last = match horizon {
        Some(h) => path.index_of(h).ok_or_else(|| Error::Coverage(format!("horizon {h} not on the path grid")))?,
        None => path.times.len() - 1,
    };
    if last % stride != 0 {
        return Err(Error::InvalidInput("horizon must be a multiple of the rebalancing stride".into()));
    }
    let h_basis = &model.h;
    let c_basis = &model.c;
    let mut v = initial_wealth;
    let mut log_bh: f64 = 0.0;
    let mut rows = Vec::with_capacity(last / stride + 1);
    let mut obs = observe(model, path, 0, contracts)?;
    let mut ratios = strategy.ratios(&obs)?;
    let mut max_err: Option<f64> = None;
    let mut pnl = 0.0;
    let mut fund = 0.0;
    let mut coll = 0.0;
    let mut i = 0;
    loop {
        let t = path.times[i];
        let beta = collateral.value_at(t);
        let c = -beta * v;
        let vp = v + c;
        let (tv, err) = match target {
            Some(tg) => {
                let tv = tg.value(&obs)?;
                let e = v - tv;
                max_err = Some(max_err.map_or(e.abs(), |m: f64| m.max(e.abs())));
                (Some(tv), Some(e))
            }
            None => (None, None),
        };
        let cf = match target {
            Some(tg) => tg.cashflow(&obs)?,
            None => 0.0,
        };
        rows.push(LedgerRow {
            t,
            wealth: v,
            portfolio: vp,
            collateral: c,
            phi0: vp * (-log_bh).exp(),
            phi: ratios.phi_futures.clone(),
            target: tv,
            error: err,
            futures_pnl: pnl,
            funding_interest: fund,
            collateral_interest: coll,
            cashflow: cf,
        });
        v -= cf;
        if i >= last {
            break;
        }
        let j = i + stride;
        let (t0, t1) = (t, path.times[j]);
        let ix = path.integrate_factor(t0, t1, IntegrationScheme::Exact)?;
        let gh = (ix + h_basis.integral(t0, t1)).exp();
        let gc = (ix + c_basis.integral(t0, t1)).exp();
        let next = observe(model, path, j, contracts)?;
        pnl = 0.0;
        for (k, phi) in ratios.phi_futures.iter().enumerate() {
            pnl += phi * (next.futures[k].price() - obs.futures[k].price());
        }
        fund = (1.0 - beta) * v * (gh - 1.0);
        coll = beta * v * (gc - 1.0);
        v = v * ((1.0 - beta) * gh + beta * gc) + pnl;
        log_bh += ix + h_basis.integral(t0, t1);
        i = j;
        obs = next;
        ratios = strategy.ratios(&obs)?;
    }
    Ok(WealthLedger { rows, terminal_wealth: v, max_abs_error: max_err })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementReport {
    pub dts: Vec<f64>,
    /// Mean over paths of `|terminal wealth|` (wealth left after all cash flows).
    pub mean_abs_error: Vec<f64>,
    pub rms_error: Vec<f64>,
    pub max_abs_tracking: Vec<f64>,
    pub slope: f64,
    pub rms_slope: f64,
    pub n_paths: usize,
}

pub struct RefinementSetup<'a> {
    pub model: &'a MarketModel,
    pub strategy: &'a dyn HedgeStrategy,
    pub target: &'a dyn Target,
    pub contracts: &'a [FuturesContract],
    pub collateral: &'a CollateralFraction,
    pub start: f64,
    pub maturity: f64,
    /// Finest step, in years.
    pub base_dt: f64,
    /// Rebalancing strides on the finest grid, coarse to fine.
    pub strides: Vec<usize>,
    pub n_paths: usize,
    pub seed: u64,
}

/// Uniform grid `start + k / steps_per_year` reaching `maturity` exactly.
pub fn uniform_grid(start: f64, maturity: f64, dt: f64) -> Result<Vec<f64>> {
    let per_year = 1.0 / dt;
    let k0 = (start * per_year).round();
    let k1 = (maturity * per_year).round();
    if ((k0 / per_year) - start).abs() > 1e-9 || ((k1 / per_year) - maturity).abs() > 1e-9 || k1 <= k0 {
        return Err(Error::InvalidInput("dates must sit on the simulation grid".into()));
    }
    Ok((k0 as i64..=k1 as i64).map(|k| k as f64 / per_year).collect())
}

/// Replicates the target along independent paths at several rebalancing frequencies.
pub fn refinement_study(setup: &RefinementSetup<'_>) -> Result<RefinementReport> {
    let grid = uniform_grid(setup.start, setup.maturity, setup.base_dt)?;
    let steps = grid.len() - 1;
    if setup.strides.iter().any(|&s| s == 0 || steps % s != 0) {
        return Err(Error::InvalidInput("each stride must divide the number of grid steps".into()));
    }
    let params = setup.model.factor;
    let per_path: Vec<Result<Vec<(f64, f64)>>> = (0..setup.n_paths)
        .into_par_iter()
        .map(|k| {
            let path = simulate_path(&params, &grid, setup.seed, k as u64)?;
            let obs0 = observe(setup.model, &path, 0, setup.contracts)?;
            let v0 = setup.target.value(&obs0)?;
            setup
                .strides
                .iter()
                .map(|&s| {
                    let l = simulate_wealth(&WealthInputs {
                        model: setup.model,
                        path: &path,
                        strategy: setup.strategy,
                        contracts: setup.contracts,
                        collateral: setup.collateral,
                        initial_wealth: v0,
                        stride: s,
                        target: Some(setup.target),
                        horizon: None,
                    })?;
                    Ok((l.terminal_wealth, l.max_abs_error.unwrap_or(0.0)))
                })
                .collect()
        })
        .collect();
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    let n = setup.n_paths as f64;
    let dts: Vec<f64> = setup.strides.iter().map(|&s| s as f64 * setup.base_dt).collect();
    let mut mean_abs = Vec::new();
    let mut rms = Vec::new();
    let mut max_track = Vec::new();
    for k in 0..setup.strides.len() {
        let errs: Vec<f64> = per_path.iter().map(|r| r[k].0).collect();
        mean_abs.push(errs.iter().map(|e| e.abs()).sum::<f64>() / n);
        rms.push((errs.iter().map(|e| e * e).sum::<f64>() / n).sqrt());
        max_track.push(per_path.iter().map(|r| r[k].1).fold(0.0, f64::max));
    }
    Ok(RefinementReport {
        slope: loglog_slope(&dts, &mean_abs),
        rms_slope: loglog_slope(&dts, &rms),
        dts,
        mean_abs_error: mean_abs,
        rms_error: rms,
        max_abs_tracking: max_track,
        n_paths: setup.n_paths,
    })
}
