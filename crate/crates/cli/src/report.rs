//! JSON result documents. Every document carries `schema_version`; bump it on
//! any field change.

use serde::{Deserialize, Serialize};
use sofr_core::options::CapletBreakdown;
use sofr_core::swaps::LegValue;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceReport {
    pub schema_version: u32,
    pub command: String,
    pub valuation_date: String,
    pub valuation_time: f64,
    pub factor: f64,
    pub instruments: Vec<PricedInstrument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricedInstrument {
    pub name: String,
    pub kind: String,
    pub notional: f64,
    /// Fixed rate or strike actually used.
    pub strike: Option<f64>,
    pub price: f64,
    /// Forward swap rate of the schedule; the futures rate for futures.
    pub fair_rate: f64,
    #[serde(default)]
    pub legs: Vec<LegValue>,
    #[serde(default)]
    pub caplets: Vec<CapletBreakdown>,
    pub futures: Option<FuturesQuote>,
    pub quadrature: Option<QuadratureDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuturesQuote {
    pub rate: f64,
    pub price: f64,
    pub display_rate: f64,
    pub settlement_price: f64,
    pub accrued: f64,
    /// Futures minus forward rate; absent once the period has started.
    pub convexity_correction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureDiagnostics {
    pub nodes: usize,
    pub doubling_difference: f64,
    pub tilt_mean_shift: f64,
    pub tilted_mean: f64,
    pub tilted_std: f64,
    pub analytic_price: f64,
    pub critical_x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub paths: usize,
    pub antithetic: bool,
    pub z_limit: f64,
    pub rows: Vec<McRow>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McRow {
    pub name: String,
    pub closed_form: f64,
    pub mc_mean: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub instrument: String,
    pub notional: f64,
    pub paths: usize,
    pub dts: Vec<f64>,
    /// Mean `|terminal wealth|` per step size.
    pub mean_abs_error: Vec<f64>,
    pub rms_error: Vec<f64>,
    /// Largest `|V - target|` seen along any path, per step size.
    pub max_abs_tracking: Vec<f64>,
    pub slope: f64,
    pub rms_slope: f64,
    pub max_error: f64,
    pub pass: bool,
}
