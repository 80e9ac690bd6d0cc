//! Multi-curve SOFR derivatives on a one-factor Gaussian (Vasicek) factor.
//!
//! Every overnight rate is `x_t + alpha(t)` for a shared factor `x` and a
//! deterministic piecewise-constant basis. Times are year fractions from a
//! model epoch (act/360 by default, see [`calendar::ModelClock`]).

pub mod calendar;
pub mod classical;
pub mod config;
pub mod curves;
pub mod error;
pub mod futures;
pub mod hedging;
pub mod mc;
pub mod normal;
pub mod options;
pub mod quadrature;
pub mod swaps;
pub mod vasicek;

pub use calendar::{AccrualPeriod, Calendar, DayCount, FixingSeries, ModelClock};
pub use curves::{BasisCurve, CollateralFraction, Discounting, MarketModel, RateLabel, RatePath};
pub use error::{Error, Result};
pub use futures::{FuturesContract, FuturesState, Period};
pub use hedging::{HedgeRatios, WealthLedger};
pub use mc::{McEstimate, SimConfig};
pub use swaps::{Side, SwapSpec, TenorStructure};
pub use vasicek::{FactorParams, IntegratedFactorLaw};
