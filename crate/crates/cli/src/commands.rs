//! The four subcommands. Each returns its artifact as text plus an exit status.

use crate::exit;
use crate::report::*;
use crate::scenario::{Instrument, Kind, Scenario};
use anyhow::{anyhow, bail, Context, Result};
use sofr_core::curves::{Discounting, IntegrationScheme, MarketModel, RatePath, RealizedHistory};
use sofr_core::futures::{convexity_correction, display_rate, futures_state, settlement_price, FuturesContract, Period};
use sofr_core::hedging::{
    observe, refinement_study, simulate_wealth, uniform_grid, CapletReplication, HedgeStrategy, RefinementSetup,
    SwapReplication, Target, WealthInputs,
};
use sofr_core::mc::{mc_price, simulate_path, Cashflows, SimConfig};
use sofr_core::options::{cap_caplets, floor_price, swaption_price, CapSpec, CapletSpec};
use sofr_core::swaps::{
    fair_rate_from_legs, price_from_legs, realized_sofr, swap_legs, swap_price, SwapSpec,
};
use sofr_core::vasicek::FactorParams;

pub struct Output {
    pub text: String,
    pub status: i32,
    /// Secondary artifact (the hedge ledger CSV).
    pub ledger: Option<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, status: exit::OK, ledger: None }
    }
}

/// Core failures that are numerical-check breaches rather than bad input.
pub fn status_of(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<sofr_core::Error>() {
        Some(sofr_core::Error::Numerical(_)) | Some(sofr_core::Error::NonFinite { .. }) => exit::CHECK_FAILED,
        _ => exit::VALIDATION,
    }
}

fn history(s: &Scenario) -> Option<&dyn RealizedHistory> {
    s.history.as_ref().map(|h| h as &dyn RealizedHistory)
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Futures => "futures",
        Kind::Swap => "swap",
        Kind::Caplet => "caplet",
        Kind::Cap => "cap",
        Kind::Floor => "floor",
        Kind::Swaption => "swaption",
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn futures_quote(s: &Scenario, per: Period) -> Result<FuturesQuote> {
    let (t, x, m) = (s.valuation, s.factor, &s.model);
    let c = FuturesContract::new(per);
    let accrued = if t > per.start {
        let h = history(s).ok_or_else(|| anyhow!("contract is in its period: a fixings file is required"))?;
        Some(realized_sofr(m, h, per.start, t.min(per.end))?)
    } else {
        None
    };
    let st = futures_state(m, x, t, &c, accrued)?;
    let cc = if t <= per.start { Some(convexity_correction(m, x, t, &c)?) } else { None };
    Ok(FuturesQuote {
        rate: st.rate,
        price: st.price(),
        display_rate: display_rate(st.rate),
        settlement_price: settlement_price(st.rate),
        accrued: st.accrued,
        convexity_correction: cc,
    })
}

fn swap_spec(inst: &Instrument, fixed: f64) -> Result<SwapSpec> {
    Ok(SwapSpec::new(inst.tenor.clone(), fixed, inst.notional, inst.side)?.collateralized(inst.collateral.clone()))
}

fn cap_spec(inst: &Instrument, strike: f64) -> Result<CapSpec> {
    Ok(CapSpec::new(inst.tenor.clone(), strike, inst.notional)?.collateralized(inst.collateral.clone()))
}

/// Forward swap rate of the schedule, used as the at-the-money strike.
fn fair_rate(s: &Scenario, inst: &Instrument) -> Result<f64> {
    let legs = swap_legs(&s.model, s.factor, s.valuation, &inst.tenor, &inst.collateral, history(s))?;
    Ok(fair_rate_from_legs(&legs)?)
}

pub fn price_instrument(s: &Scenario, inst: &Instrument) -> Result<PricedInstrument> {
    let (t, x, m) = (s.valuation, s.factor, &s.model);
    let hist = history(s);
    let mut out = PricedInstrument {
        name: inst.name.clone(),
        kind: kind_name(inst.kind).into(),
        notional: inst.notional,
        strike: None,
        price: 0.0,
        fair_rate: 0.0,
        legs: Vec::new(),
        caplets: Vec::new(),
        futures: None,
        quadrature: None,
    };
    match inst.kind {
        Kind::Futures => {
            let q = futures_quote(s, inst.period())?;
            out.price = inst.notional * q.price;
            out.fair_rate = q.rate;
            out.futures = Some(q);
        }
        Kind::Swap => {
            let legs = swap_legs(m, x, t, &inst.tenor, &inst.collateral, hist)?;
            out.fair_rate = fair_rate_from_legs(&legs)?;
            let spec = swap_spec(inst, inst.strike.unwrap_or(out.fair_rate))?;
            out.price = price_from_legs(&legs, &spec);
            out.strike = Some(spec.fixed_rate);
            out.legs = legs;
        }
        Kind::Caplet | Kind::Cap | Kind::Floor => {
            out.fair_rate = fair_rate(s, inst)?;
            let spec = cap_spec(inst, inst.strike.unwrap_or(out.fair_rate))?;
            out.caplets = cap_caplets(m, x, t, &spec, hist)?;
            out.price = if inst.kind == Kind::Floor {
                floor_price(m, x, t, &spec, hist)?
            } else {
                out.caplets.iter().map(|c| c.price).sum()
            };
            out.strike = Some(spec.strike);
        }
        Kind::Swaption => {
            out.fair_rate = fair_rate(s, inst)?;
            let spec = swap_spec(inst, inst.strike.unwrap_or(out.fair_rate))?;
            let r = swaption_price(m, x, t, &spec, &s.quadrature)?;
            out.price = r.price;
            out.strike = Some(spec.fixed_rate);
            out.quadrature = Some(QuadratureDiagnostics {
                nodes: r.nodes,
                doubling_difference: r.doubling_difference,
                tilt_mean_shift: r.tilt_mean_shift,
                tilted_mean: r.tilted_mean,
                tilted_std: r.tilted_std,
                analytic_price: r.analytic_price,
                critical_x: r.critical_x,
            });
        }
    }
    Ok(out)
}

pub fn price(s: &Scenario) -> Result<Output> {
    if s.instruments.is_empty() {
        bail!("instruments: nothing to price");
    }
    let mut rows = Vec::new();
    for inst in &s.instruments {
        rows.push(price_instrument(s, inst).with_context(|| format!("pricing {}", inst.name))?);
    }
    let report = PriceReport {
        schema_version: SCHEMA_VERSION,
        command: "price".into(),
        valuation_date: s.clock.date_at(s.valuation).to_string(),
        valuation_time: s.valuation,
        factor: s.factor,
        instruments: rows,
    };
    Ok(Output::ok(json(&report)?))
}

pub fn futures_curve(s: &Scenario) -> Result<Output> {
    let mut csv = String::from("contract_start,contract_end,rate,price\n");
    let mut n = 0;
    for inst in s.instruments.iter().filter(|i| i.kind == Kind::Futures) {
        let per = inst.period();
        let q = futures_quote(s, per).with_context(|| format!("quoting {}", inst.name))?;
        csv.push_str(&format!(
            "{},{},{:.12},{:.12}\n",
            s.clock.date_at(per.start),
            s.clock.date_at(per.end),
            q.rate,
            q.price
        ));
        n += 1;
    }
    if n == 0 {
        bail!("instruments: no futures contracts in the scenario");
    }
    Ok(Output::ok(csv))
}

/// Model seen from the valuation date: the factor restarts at the scenario level.
fn model_at_valuation(s: &Scenario) -> Result<MarketModel> {
    let f = s.model.factor;
    Ok(s.model.with_factor(FactorParams::new(f.a, f.b, f.sigma, s.factor)?))
}

fn sofr_growth(m: &MarketModel, path: &RatePath, per: Period) -> sofr_core::Result<f64> {
    Ok((path.integrate_factor(per.start, per.end, IntegrationScheme::Exact)? + m.s.integral(per.start, per.end)).exp())
}

fn mc_row(s: &Scenario, inst: &Instrument, seed: u64, paths: usize) -> Result<McRow> {
    let t = s.valuation;
    if t > inst.tenor.first() {
        bail!("{}: Monte Carlo check needs an instrument that has not started", inst.name);
    }
    let priced = price_instrument(s, inst)?;
    let m = model_at_valuation(s)?;
    let mut grid = vec![t];
    grid.extend(inst.tenor.dates().iter().copied().filter(|&d| d > t));
    let mut cfg = SimConfig::new(seed, paths, grid);
    cfg.antithetic = s.mc.antithetic;
    let strike = priced.strike.unwrap_or(0.0);
    let sign = inst.side.sign();
    let n = inst.notional;
    let disc = Discounting::Collateralized(inst.collateral.clone());
    let tenor = &inst.tenor;
    let est = match inst.kind {
        Kind::Futures => {
            let per = inst.period();
            // The futures price is a plain expectation of 1 - R.
            mc_price(&m, |p| Ok(vec![(per.end, n * (1.0 - (sofr_growth(&m, p, per)? - 1.0) / per.delta()))]), None, &cfg)?
        }
        Kind::Swap | Kind::Caplet | Kind::Cap | Kind::Floor => {
            let kind = inst.kind;
            mc_price(
                &m,
                |p| {
                    let mut cf: Cashflows = Vec::new();
                    for per in tenor.periods() {
                        let swaplet = sofr_growth(&m, p, per)? - 1.0 - per.delta() * strike;
                        let amount = match kind {
                            Kind::Swap => sign * swaplet,
                            Kind::Floor => (-swaplet).max(0.0),
                            _ => swaplet.max(0.0),
                        };
                        cf.push((per.end, n * amount));
                    }
                    Ok(cf)
                },
                Some(&disc),
                &cfg,
            )?
        }
        Kind::Swaption => {
            let spec = swap_spec(inst, strike)?;
            let t0 = tenor.first();
            mc_price(
                &m,
                |p| Ok(vec![(t0, swap_price(&m, p.factor_at(t0)?, t0, &spec, None)?.max(0.0))]),
                Some(&disc),
                &cfg,
            )?
        }
    };
    Ok(McRow {
        name: inst.name.clone(),
        closed_form: priced.price,
        mc_mean: est.mean,
        std_error: est.std_error,
        z: est.z_score(priced.price),
    })
}

pub fn mc_verify(s: &Scenario, paths: Option<usize>) -> Result<Output> {
    if s.instruments.is_empty() {
        bail!("instruments: nothing to verify");
    }
    let paths = paths.unwrap_or(s.mc.paths);
    let mut rows = Vec::new();
    for (k, inst) in s.instruments.iter().enumerate() {
        // One independent stream family per instrument.
        let seed = s.seed.wrapping_add(k as u64);
        rows.push(mc_row(s, inst, seed, paths).with_context(|| format!("verifying {}", inst.name))?);
    }
    let pass = rows.iter().all(|r| r.z.abs() <= s.mc.z_limit);
    let report = McReport {
        schema_version: SCHEMA_VERSION,
        command: "mc-verify".into(),
        seed: s.seed,
        paths,
        antithetic: s.mc.antithetic,
        z_limit: s.mc.z_limit,
        rows,
        pass,
    };
    Ok(Output { text: json(&report)?, status: if pass { exit::OK } else { exit::CHECK_FAILED }, ledger: None })
}

enum Replication<'a> {
    Swap(SwapReplication<'a>),
    Caplet(CapletReplication<'a>),
}

impl Replication<'_> {
    fn parts(&self) -> (&dyn HedgeStrategy, &dyn Target, Vec<FuturesContract>) {
        match self {
            Replication::Swap(r) => (r, r, r.contracts()),
            Replication::Caplet(r) => (r, r, r.contracts()),
        }
    }
}

pub fn hedge_sim(s: &Scenario, paths: Option<usize>) -> Result<Output> {
    let h = s.hedge.as_ref().ok_or_else(|| anyhow!("[hedge]: section missing"))?;
    let inst = s.instrument(&h.instrument)?;
    let t = s.valuation;
    if t > inst.tenor.first() {
        bail!("hedge.instrument: {} has already started", inst.name);
    }
    if h.steps_per_year == 0 || h.strides.is_empty() || h.strides.windows(2).any(|w| w[1] >= w[0]) {
        bail!("hedge: need steps_per_year > 0 and strides strictly decreasing (coarse to fine)");
    }
    let paths = paths.unwrap_or(h.paths);
    if paths == 0 || !(h.max_error > 0.0) {
        bail!("hedge: need paths >= 1 and max_error > 0");
    }
    let m = model_at_valuation(s)?;
    let fair = fair_rate(s, inst)?;
    let strike = inst.strike.unwrap_or(fair);
    let rep = match inst.kind {
        Kind::Swap => Replication::Swap(SwapReplication { model: &m, spec: swap_spec(inst, strike)? }),
        Kind::Caplet => Replication::Caplet(CapletReplication {
            model: &m,
            spec: CapletSpec::new(inst.period(), strike, inst.notional)?.collateralized(inst.collateral.clone()),
        }),
        k => bail!("hedge.instrument: replication covers swaps and caplets, not {}", kind_name(k)),
    };
    let (strategy, target, contracts) = rep.parts();
    let base_dt = 1.0 / h.steps_per_year as f64;
    let maturity = inst.tenor.last();
    let report = refinement_study(&RefinementSetup {
        model: &m,
        strategy,
        target,
        contracts: &contracts,
        collateral: &inst.collateral,
        start: t,
        maturity,
        base_dt,
        strides: h.strides.clone(),
        n_paths: paths,
        seed: s.seed,
    })?;
    // Ledger of the first path at the finest step.
    let grid = uniform_grid(t, maturity, base_dt)?;
    let path = simulate_path(&m.factor, &grid, s.seed, 0)?;
    let v0 = target.value(&observe(&m, &path, 0, &contracts)?)?;
    let ledger = simulate_wealth(&WealthInputs {
        model: &m,
        path: &path,
        strategy,
        contracts: &contracts,
        collateral: &inst.collateral,
        initial_wealth: v0,
        stride: *h.strides.last().unwrap(),
        target: Some(target),
        horizon: None,
    })?;
    let pass = report.mean_abs_error.iter().all(|&e| e <= h.max_error * inst.notional);
    let summary = HedgeReport {
        schema_version: SCHEMA_VERSION,
        command: "hedge-sim".into(),
        seed: s.seed,
        instrument: inst.name.clone(),
        notional: inst.notional,
        paths,
        dts: report.dts,
        mean_abs_error: report.mean_abs_error,
        rms_error: report.rms_error,
        max_abs_tracking: report.max_abs_tracking,
        slope: report.slope,
        rms_slope: report.rms_slope,
        max_error: h.max_error,
        pass,
    };
    Ok(Output {
        text: json(&summary)?,
        status: if pass { exit::OK } else { exit::CHECK_FAILED },
        ledger: Some(ledger.to_csv()),
    })
}
