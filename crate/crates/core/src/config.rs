//! TOML model files.
//!
//! ```toml
//! [factor]
//! a = 0.02
//! b = 0.3
//! sigma = 0.01
//! x0 = 0.03
//!
//! [bases]            # decimal spreads; a number or { knots = [...], values = [...] }
//! s = -0.0005
//! e = 0.0
//! u = 0.003
//! c = 0.0
//! h = { knots = [0.0, 1.0], values = [0.001, 0.0015] }
//!
//! [collateral]       # optional, defaults to 0
//! beta = 0.0
//! ```
//!
//! Knots are model times in years from the scenario epoch.

use crate::curves::{BasisCurve, CollateralFraction, MarketModel, PiecewiseConstant, RateLabel};
use crate::error::{Error, Result};
use crate::vasicek::FactorParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Constant(f64),
    Steps { knots: Vec<f64>, values: Vec<f64> },
}

impl CurveSpec {
    pub fn build(&self) -> Result<PiecewiseConstant> {
        match self {
            CurveSpec::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::InvalidInput("non-finite curve value".into()));
                }
                Ok(PiecewiseConstant::constant(*v))
            }
            CurveSpec::Steps { knots, values } => PiecewiseConstant::new(knots.clone(), values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasesFile {
    pub s: CurveSpec,
    pub e: CurveSpec,
    pub u: CurveSpec,
    pub c: CurveSpec,
    pub h: CurveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollateralFile {
    pub beta: CurveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub factor: FactorParams,
    pub bases: BasesFile,
    #[serde(default)]
    pub collateral: Option<CollateralFile>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<MarketModel> {
        let b = &self.bases;
        let curve = |label: RateLabel, spec: &CurveSpec| -> Result<BasisCurve> {
            spec.build()
                .map(|c| BasisCurve::from_curve(Some(label), c))
                .map_err(|e| Error::InvalidInput(format!("bases.{label}: {e}")))
        };
        let bases = [
            curve(RateLabel::Sofr, &b.s)?,
            curve(RateLabel::Effr, &b.e)?,
            curve(RateLabel::Unsecured, &b.u)?,
            curve(RateLabel::Collateral, &b.c)?,
            curve(RateLabel::Funding, &b.h)?,
        ];
        let collateral = match &self.collateral {
            Some(c) => CollateralFraction::new(c.beta.build()?)?,
            None => CollateralFraction::none(),
        };
        MarketModel::new(self.factor, bases, collateral)
    }
}

pub fn load_model(text: &str) -> Result<MarketModel> {
    ModelFile::parse(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
[factor]
a = 0.02
b = 0.3
sigma = 0.01
x0 = 0.03

[bases]
s = -0.0005
e = 0.0
u = 0.003
c = 0.0
h = { knots = [0.0, 1.0], values = [0.001, 0.0015] }
"#;

    #[test]
    fn parses_documented_schema() {
        let m = load_model(TEXT).unwrap();
        assert_eq!(m.factor.b, 0.3);
        assert_eq!(m.h.value_at(2.0), 0.0015);
        assert_eq!(m.s.label, Some(RateLabel::Sofr));
        assert_eq!(m.collateral.value_at(0.0), 0.0);
    }

    #[test]
    fn reports_location_of_errors() {
        let bad = TEXT.replace("b = 0.3", "b = \"fast\"");
        let err = load_model(&bad).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        let neg = TEXT.replace("b = 0.3", "b = -0.3");
        assert!(matches!(load_model(&neg), Err(Error::Domain(_))));
        let missing = TEXT.replace("u = 0.003\n", "");
        assert!(load_model(&missing).is_err());
    }
}
