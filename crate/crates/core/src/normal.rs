//! Standard normal helpers.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use std::sync::OnceLock;

fn standard() -> &'static Normal {
    static N: OnceLock<Normal> = OnceLock::new();
    N.get_or_init(|| Normal::standard())
}

pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    standard().cdf(x)
}

pub fn pdf(x: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    standard().pdf(x)
}
