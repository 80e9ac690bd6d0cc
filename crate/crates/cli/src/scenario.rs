//! Scenario files: model, valuation date, instruments and run options.
//!
//! Dates are ISO strings and become act/360 model times from `epoch` here and
//! nowhere else. Rates and spreads are decimals.

use anyhow::{anyhow, bail, Context, Result};
use chrono::{Months, NaiveDate};
use serde::Deserialize;
use sofr_core::calendar::{parse_fixings_csv, FixingHistory, HolidayCalendar, ModelClock};
use sofr_core::config::ModelFile;
use sofr_core::curves::{CollateralFraction, MarketModel};
use sofr_core::futures::Period;
use sofr_core::options::QuadratureConfig;
use sofr_core::swaps::{Side, TenorStructure};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Futures,
    Swap,
    Caplet,
    Cap,
    Floor,
    Swaption,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentFile {
    pub name: String,
    pub kind: Kind,
    /// Full schedule `T_0 < ... < T_n`; alternative to `start`/`end`.
    pub dates: Option<Vec<NaiveDate>>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    #[serde(default = "three")]
    pub frequency_months: u32,
    /// Fixed rate or cap strike; at the money when absent.
    pub strike: Option<f64>,
    #[serde(default = "one")]
    pub notional: f64,
    #[serde(default)]
    pub side: Side,
    /// Collateral fraction; the model's when absent.
    pub collateral: Option<f64>,
}

fn three() -> u32 {
    3
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub paths: usize,
    pub antithetic: bool,
    pub z_limit: f64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection { paths: 100_000, antithetic: false, z_limit: 4.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeSection {
    pub instrument: String,
    /// Finest simulation grid.
    #[serde(default = "fine_steps")]
    pub steps_per_year: u32,
    /// Rebalancing strides on the finest grid, coarse to fine.
    #[serde(default = "default_strides")]
    pub strides: Vec<usize>,
    #[serde(default = "hedge_paths")]
    pub paths: usize,
    /// Allowed mean terminal replication error at every step size, as a fraction of notional.
    #[serde(default = "max_error")]
    pub max_error: f64,
}

fn fine_steps() -> u32 {
    720
}

fn default_strides() -> Vec<usize> {
    vec![2, 1]
}

fn hedge_paths() -> usize {
    64
}

fn max_error() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    pub epoch: NaiveDate,
    pub valuation_date: Option<NaiveDate>,
    /// Factor level at the valuation date; the model's `x0` when absent.
    pub factor: Option<f64>,
    /// Path to a model file, or the model inline.
    pub model: toml::Value,
    /// `date,rate` CSV of published fixings.
    pub fixings: Option<PathBuf>,
    #[serde(default)]
    pub holidays: Vec<NaiveDate>,
    #[serde(default)]
    pub instruments: Vec<InstrumentFile>,
    #[serde(default)]
    pub mc: McSection,
    pub hedge: Option<HedgeSection>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

#[derive(Debug, Clone)]
pub struct Instrument {
    pub name: String,
    pub kind: Kind,
    pub tenor: TenorStructure,
    pub strike: Option<f64>,
    pub notional: f64,
    pub side: Side,
    pub collateral: CollateralFraction,
}

impl Instrument {
    pub fn period(&self) -> Period {
        self.tenor.period(1)
    }
}

pub struct Scenario {
    pub seed: u64,
    pub clock: ModelClock,
    pub valuation: f64,
    pub factor: f64,
    pub model: MarketModel,
    pub history: Option<FixingHistory<HolidayCalendar>>,
    pub instruments: Vec<Instrument>,
    pub mc: McSection,
    pub hedge: Option<HedgeSection>,
    pub quadrature: QuadratureConfig,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in scenario {}", path.display()))
    }

    /// Relative paths inside the scenario resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text)?;
        let model_file = match &file.model {
            toml::Value::String(p) => {
                let p = base.join(p);
                let t = std::fs::read_to_string(&p).with_context(|| format!("reading model {}", p.display()))?;
                ModelFile::parse(&t).with_context(|| format!("in model {}", p.display()))?
            }
            toml::Value::Table(t) => t.clone().try_into().context("in inline [model]")?,
            _ => bail!("model: expected a file path or a table"),
        };
        let model = model_file.build().context("model")?;
        let clock = ModelClock::new(file.epoch);
        let valuation_date = file.valuation_date.unwrap_or(file.epoch);
        if valuation_date < file.epoch {
            bail!("valuation_date {valuation_date} precedes epoch {}", file.epoch);
        }
        let valuation = clock.time_of(valuation_date);
        let factor = file.factor.unwrap_or(model.factor.x0);
        if !factor.is_finite() {
            bail!("factor: must be finite");
        }
        let history = match &file.fixings {
            Some(p) => {
                let p = base.join(p);
                let t = std::fs::read_to_string(&p).with_context(|| format!("reading fixings {}", p.display()))?;
                let rows = parse_fixings_csv(&t).with_context(|| format!("in fixings {}", p.display()))?;
                Some(FixingHistory {
                    clock,
                    calendar: HolidayCalendar::new(file.holidays.iter().copied()),
                    fixings: rows.into_iter().collect(),
                    s_basis: model.s.clone(),
                })
            }
            None => None,
        };
        let mut instruments = Vec::new();
        for (k, inst) in file.instruments.iter().enumerate() {
            let built = build_instrument(inst, &clock, &model)
                .with_context(|| format!("instruments[{k}] ({})", inst.name))?;
            if instruments.iter().any(|i: &Instrument| i.name == built.name) {
                bail!("instruments[{k}]: duplicate name {}", built.name);
            }
            if valuation > built.tenor.last() {
                bail!("instruments[{k}] ({}): matures before the valuation date", built.name);
            }
            instruments.push(built);
        }
        if let Some(h) = &file.hedge {
            if !instruments.iter().any(|i| i.name == h.instrument) {
                bail!("hedge.instrument: no instrument named {}", h.instrument);
            }
        }
        if file.mc.paths < 2 || !(file.mc.z_limit > 0.0) {
            bail!("mc: need paths >= 2 and z_limit > 0");
        }
        Ok(Scenario {
            seed: file.seed,
            clock,
            valuation,
            factor,
            model,
            history,
            instruments,
            mc: file.mc,
            hedge: file.hedge,
            quadrature: file.quadrature,
        })
    }

    pub fn instrument(&self, name: &str) -> Result<&Instrument> {
        self.instruments.iter().find(|i| i.name == name).ok_or_else(|| anyhow!("no instrument named {name}"))
    }
}

fn schedule(inst: &InstrumentFile) -> Result<Vec<NaiveDate>> {
    if let Some(d) = &inst.dates {
        if inst.start.is_some() || inst.end.is_some() {
            bail!("give either dates or start/end, not both");
        }
        return Ok(d.clone());
    }
    let start = inst.start.ok_or_else(|| anyhow!("start: missing (or give dates)"))?;
    if inst.frequency_months == 0 {
        bail!("frequency_months: must be positive");
    }
    let step = Months::new(inst.frequency_months);
    let end = match inst.end {
        Some(e) => e,
        None => start.checked_add_months(step).ok_or_else(|| anyhow!("start: date out of range"))?,
    };
    let mut out = vec![start];
    let mut k = 1;
    loop {
        let next = start
            .checked_add_months(Months::new(inst.frequency_months * k))
            .ok_or_else(|| anyhow!("end: date out of range"))?;
        if next >= end {
            out.push(end);
            break;
        }
        out.push(next);
        k += 1;
    }
    Ok(out)
}

fn build_instrument(inst: &InstrumentFile, clock: &ModelClock, model: &MarketModel) -> Result<Instrument> {
    let dates = schedule(inst)?;
    let times: Vec<f64> = dates.iter().map(|&d| clock.time_of(d)).collect();
    if times.first().is_some_and(|&t| t < 0.0) {
        bail!("dates: schedule starts before the epoch");
    }
    let tenor = TenorStructure::new(times)?;
    if matches!(inst.kind, Kind::Futures | Kind::Caplet) && tenor.n_periods() != 1 {
        bail!("kind {:?}: exactly one accrual period expected", inst.kind);
    }
    if !(inst.notional.is_finite() && inst.notional > 0.0) {
        bail!("notional: must be positive");
    }
    if let Some(k) = inst.strike {
        if !k.is_finite() {
            bail!("strike: must be finite");
        }
    }
    let collateral = match inst.collateral {
        Some(b) => CollateralFraction::constant(b).context("collateral")?,
        None => model.collateral.clone(),
    };
    Ok(Instrument {
        name: inst.name.clone(),
        kind: inst.kind,
        tenor,
        strike: inst.strike,
        notional: inst.notional,
        side: inst.side,
        collateral,
    })
}
