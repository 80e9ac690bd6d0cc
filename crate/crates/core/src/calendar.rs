//! Business-day calendars, day counts and discrete compounding of overnight fixings.

use crate::curves::{BasisCurve, RealizedHistory};
use crate::error::{Error, Result};
use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub trait Calendar: Send + Sync {
    fn is_holiday(&self, date: NaiveDate) -> bool;

    fn is_business_day(&self, date: NaiveDate) -> bool {
        !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) && !self.is_holiday(date)
    }

    /// First business day strictly after `date`.
    fn next_business_day(&self, date: NaiveDate) -> NaiveDate {
        let mut d = date + Duration::days(1);
        while !self.is_business_day(d) {
            d += Duration::days(1);
        }
        d
    }

    /// Last business day on or before `date`.
    fn previous_or_same(&self, date: NaiveDate) -> NaiveDate {
        let mut d = date;
        while !self.is_business_day(d) {
            d -= Duration::days(1);
        }
        d
    }

    /// Business days in `[start, end)`.
    fn business_days(&self, start: NaiveDate, end: NaiveDate) -> Vec<NaiveDate> {
        let mut out = Vec::new();
        let mut d = start;
        while d < end {
            if self.is_business_day(d) {
                out.push(d);
            }
            d += Duration::days(1);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WeekendsOnly;

impl Calendar for WeekendsOnly {
    fn is_holiday(&self, _date: NaiveDate) -> bool {
        false
    }
}

/// Weekends plus an explicit holiday list.
#[derive(Debug, Clone, Default)]
pub struct HolidayCalendar {
    holidays: BTreeSet<NaiveDate>,
}

impl HolidayCalendar {
    pub fn new(holidays: impl IntoIterator<Item = NaiveDate>) -> Self {
        HolidayCalendar { holidays: holidays.into_iter().collect() }
    }
}

impl Calendar for HolidayCalendar {
    fn is_holiday(&self, date: NaiveDate) -> bool {
        self.holidays.contains(&date)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayCount {
    #[default]
    #[serde(alias = "act/360")]
    Act360,
    #[serde(alias = "act/365f")]
    Act365Fixed,
}

impl DayCount {
    pub fn basis(self) -> f64 {
        match self {
            DayCount::Act360 => 360.0,
            DayCount::Act365Fixed => 365.0,
        }
    }

    pub fn year_fraction(self, start: NaiveDate, end: NaiveDate) -> f64 {
        (end - start).num_days() as f64 / self.basis()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccrualPeriod {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub day_count: DayCount,
}

impl AccrualPeriod {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        Self::with_day_count(start, end, DayCount::Act360)
    }

    pub fn with_day_count(start: NaiveDate, end: NaiveDate, day_count: DayCount) -> Result<Self> {
        if start >= end {
            return Err(Error::Domain(format!("accrual period needs start < end ({start} .. {end})")));
        }
        Ok(AccrualPeriod { start, end, day_count })
    }

    /// `n_c`.
    pub fn calendar_days(&self) -> i64 {
        (self.end - self.start).num_days()
    }

    pub fn year_fraction(&self) -> f64 {
        self.day_count.year_fraction(self.start, self.end)
    }
}

/// Published overnight fixings with their calendar-day weights `n_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixingSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    weights: Vec<u32>,
}

impl FixingSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>, weights: Vec<u32>) -> Result<Self> {
        if dates.len() != values.len() || dates.len() != weights.len() {
            return Err(Error::InvalidInput("dates, values and weights differ in length".into()));
        }
        if dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("fixing dates must be strictly increasing".into()));
        }
        if weights.iter().any(|&n| n < 1) {
            return Err(Error::InvalidInput("every fixing weight must be >= 1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite fixing".into()));
        }
        Ok(FixingSeries { dates, values, weights })
    }

    /// Weights from the calendar: days until the next business day, cut at `period_end`.
    pub fn from_rates(calendar: &dyn Calendar, fixings: &[(NaiveDate, f64)], period_end: NaiveDate) -> Result<Self> {
        let mut dates = Vec::with_capacity(fixings.len());
        let mut values = Vec::with_capacity(fixings.len());
        let mut weights = Vec::with_capacity(fixings.len());
        for &(d, r) in fixings {
            if !calendar.is_business_day(d) {
                return Err(Error::CalendarInconsistency(format!("fixing on non-business day {d}")));
            }
            let next = calendar.next_business_day(d).min(period_end);
            let n = (next - d).num_days();
            if n < 1 {
                return Err(Error::Coverage(format!("fixing {d} lies outside the period ending {period_end}")));
            }
            dates.push(d);
            values.push(r);
            weights.push(n as u32);
        }
        Self::new(dates, values, weights)
    }

    /// Every business day of `period` fixed at `rate`.
    pub fn constant(calendar: &dyn Calendar, period: &AccrualPeriod, rate: f64) -> Result<Self> {
        let days: Vec<_> = calendar.business_days(period.start, period.end).into_iter().map(|d| (d, rate)).collect();
        Self::from_rates(calendar, &days, period.end)
    }

    /// The fixings of `series` that fall in `period`, re-weighted for the period end.
    pub fn restricted(calendar: &dyn Calendar, series: &[(NaiveDate, f64)], period: &AccrualPeriod) -> Result<Self> {
        let inside: Vec<_> = series.iter().copied().filter(|(d, _)| *d >= period.start && *d < period.end).collect();
        Self::from_rates(calendar, &inside, period.end)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    fn check_covers(&self, period: &AccrualPeriod) -> Result<()> {
        let (Some(&first), Some(&last)) = (self.dates.first(), self.dates.last()) else {
            return Err(Error::Coverage("no fixings".into()));
        };
        if first != period.start {
            return Err(Error::Coverage(format!("first fixing {first} does not start the period {}", period.start)));
        }
        if last >= period.end {
            return Err(Error::Coverage(format!("fixing {last} lies beyond the period end {}", period.end)));
        }
        for j in 0..self.dates.len() - 1 {
            let reach = self.dates[j] + Duration::days(self.weights[j] as i64);
            if reach != self.dates[j + 1] {
                return Err(Error::Coverage(format!(
                    "fixing {} with weight {} does not reach the next fixing {}",
                    self.dates[j], self.weights[j], self.dates[j + 1]
                )));
            }
        }
        let total: i64 = self.weights.iter().map(|&n| n as i64).sum();
        if total != period.calendar_days() {
            return Err(Error::CalendarInconsistency(format!(
                "weights sum to {total} but the period has {} calendar days",
                period.calendar_days()
            )));
        }
        Ok(())
    }
}

/// `basis * (prod_j (1 + n_j rho_j / basis) - 1)`, accumulated without forming
/// the product so that short periods keep full precision.
fn compounded_excess(fixings: &FixingSeries, basis: f64) -> f64 {
    let mut e = 0.0;
    for (&r, &n) in fixings.values.iter().zip(&fixings.weights) {
        let u = n as f64 * r;
        e += u + e * u / basis;
    }
    e
}

/// `prod_j (1 + n_j rho_j / basis)`.
pub fn growth_factor(fixings: &FixingSeries, period: &AccrualPeriod) -> Result<f64> {
    fixings.check_covers(period)?;
    let basis = period.day_count.basis();
    Ok(1.0 + compounded_excess(fixings, basis) / basis)
}

/// Compounded average rate of the period.
pub fn compound_average(fixings: &FixingSeries, period: &AccrualPeriod) -> Result<f64> {
    fixings.check_covers(period)?;
    Ok(compounded_excess(fixings, period.day_count.basis()) / period.calendar_days() as f64)
}

/// Day-weighted arithmetic average rate of the period.
pub fn simple_average(fixings: &FixingSeries, period: &AccrualPeriod) -> Result<f64> {
    fixings.check_covers(period)?;
    // Deviations from the first fixing keep a flat series exact.
    let r0 = fixings.values[0];
    let mut acc = 0.0;
    for (&r, &n) in fixings.values.iter().zip(&fixings.weights) {
        acc += n as f64 * (r - r0);
    }
    Ok(r0 + acc / period.calendar_days() as f64)
}

/// Fixed OIS leg: the constant rate compounded with the floating leg's weights.
pub fn ois_fixed_leg(ois_rate: f64, period: &AccrualPeriod, calendar: &dyn Calendar) -> Result<f64> {
    if !ois_rate.is_finite() {
        return Err(Error::InvalidInput("OIS rate must be finite".into()));
    }
    compound_average(&FixingSeries::constant(calendar, period, ois_rate)?, period)
}

/// Reads `date,rate` rows (ISO dates, decimal rates).
pub fn parse_fixings_csv(text: &str) -> Result<Vec<(NaiveDate, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        date: NaiveDate,
        rate: f64,
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out: Vec<(NaiveDate, f64)> = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse(format!("fixings line {line}: {e}"))
        })?;
        if let Some(&(prev, _)) = out.last() {
            if row.date <= prev {
                return Err(Error::Parse(format!("fixing dates not increasing at {}", row.date)));
            }
        }
        out.push((row.date, row.rate));
    }
    Ok(out)
}

/// Converts dates to model times (year fractions from `epoch`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelClock {
    pub epoch: NaiveDate,
    pub day_count: DayCount,
}

impl ModelClock {
    pub fn new(epoch: NaiveDate) -> Self {
        ModelClock { epoch, day_count: DayCount::Act360 }
    }

    pub fn time_of(&self, date: NaiveDate) -> f64 {
        self.day_count.year_fraction(self.epoch, date)
    }

    /// Nearest date to model time `t`.
    pub fn date_at(&self, t: f64) -> NaiveDate {
        self.epoch + Duration::days((t * self.day_count.basis()).round() as i64)
    }
}

/// Realized factor integrals implied by published SOFR fixings:
/// `int x du = ln(growth) - int alpha^s du`.
pub struct FixingHistory<C: Calendar> {
    pub clock: ModelClock,
    pub calendar: C,
    pub fixings: BTreeMap<NaiveDate, f64>,
    pub s_basis: BasisCurve,
}

impl<C: Calendar> FixingHistory<C> {
    pub fn log_growth(&self, from: NaiveDate, to: NaiveDate) -> Result<f64> {
        let basis = self.clock.day_count.basis();
        let mut acc = 0.0;
        let mut d = from;
        while d < to {
            let fixing_day = self.calendar.previous_or_same(d);
            let rate = *self
                .fixings
                .get(&fixing_day)
                .ok_or_else(|| Error::MissingHistory(format!("no fixing for {fixing_day}")))?;
            let next = self.calendar.next_business_day(fixing_day).min(to);
            acc += (1.0 + (next - d).num_days() as f64 * rate / basis).ln();
            d = next;
        }
        Ok(acc)
    }
}

impl<C: Calendar> RealizedHistory for FixingHistory<C> {
    fn factor_integral(&self, from: f64, to: f64) -> Result<f64> {
        let g = self.log_growth(self.clock.date_at(from), self.clock.date_at(to))?;
        Ok(g - self.s_basis.integral(from, to))
    }
}
