mod common;

use common::*;
use sofr_core::classical::FlatCurve;
use sofr_core::curves::{CollateralFraction, MarketModel};
use sofr_core::futures::{futures_state, FuturesContract, Period};
use sofr_core::options::{
    black_caplet, black_floorlet, cap_price, caplet_components, caplet_price, exchange_from_k, gaussian_exchange,
    swaption_price, CapSpec, CapletSpec, GaussianExchangeInputs, QuadratureConfig, VolSchedule,
};
use sofr_core::swaps::{forward_swap_rate, swap_price, Side, SwapSpec, TenorStructure};
use sofr_core::vasicek::{integrated_factor_law, FactorParams};

/// `E(c1 e^{e1 - v1/2} - c2 e^{e2 - v2/2})^+` by Hermite in `e1` and split Simpson in `e2 | e1`.
fn exchange_oracle(inp: &GaussianExchangeInputs) -> f64 {
    let GaussianExchangeInputs { c1, c2, var1, var2, cov } = *inp;
    let s1 = var1.sqrt();
    let rho = cov / (s1 * var2.sqrt());
    let sc = var2.sqrt() * (1.0 - rho * rho).sqrt();
    normal_expectation(60, |z1| {
        let e1 = s1 * z1;
        let m2 = cov / var1 * e1;
        let a = c1 * (e1 - 0.5 * var1).exp();
        let g = |z2: f64| (a - c2 * (m2 + sc * z2 - 0.5 * var2).exp()).max(0.0) * std_normal_pdf(z2);
        // Kink where c2 e^{...} = a.
        let kink = (((a / c2).ln() + 0.5 * var2 - m2) / sc).clamp(-12.0, 12.0);
        adaptive_simpson(g, -12.0, kink, 1e-15) + adaptive_simpson(g, kink, 12.0, 1e-15)
    })
}

#[test]
fn exchange_against_two_dimensional_quadrature() {
    let inp = GaussianExchangeInputs { c1: 1.05, c2: 1.0, var1: 0.04, var2: 0.01, cov: 0.005 };
    let v = gaussian_exchange(&inp).unwrap();
    let q = exchange_oracle(&inp);
    assert!((v - q).abs() < 1e-8, "{v} vs {q}");
    let other = GaussianExchangeInputs { c1: 0.9, c2: 1.0, var1: 0.02, var2: 0.03, cov: -0.01 };
    assert!((gaussian_exchange(&other).unwrap() - exchange_oracle(&other)).abs() < 1e-8);
}

#[test]
fn exchange_limits() {
    assert!((exchange_from_k(1.05, 1e-300, 0.2).value - 1.05).abs() < 1e-15);
    assert_eq!(exchange_from_k(1.05, 1.0, 0.0).value, 1.05 - 1.0);
    assert_eq!(exchange_from_k(0.95, 1.0, 0.0).value, 0.0);
    let bad = GaussianExchangeInputs { c1: 1.0, c2: 1.0, var1: 0.01, var2: 0.01, cov: 0.05 };
    assert!(gaussian_exchange(&bad).is_err());
}

#[test]
fn caplet_matches_joint_gaussian_integral() {
    // Price = E[exp(-int_0^U r^h) (exp(int_T^U r^s) - 1 - delta kappa)^+], conditioning on x_T.
    let model = reference_model();
    let p = model.factor;
    let per = Period::new(0.5, 0.75).unwrap();
    let x = 0.03;
    let kappa = 0.035;
    let spec = CapletSpec::new(per, kappa, 1.0).unwrap();
    let st = futures_state(&model, x, 0.0, &FuturesContract::new(per), None).unwrap();
    let closed = caplet_components(&model, x, 0.0, &spec, &st).unwrap().unit_price;
    let front = integrated_factor_law(x, 0.0, 0.0, per.start, &p).unwrap();
    let (h, s) = (model.h.value_at(0.0), model.s.value_at(0.0));
    let big_k = 1.0 + per.delta() * kappa;
    let oracle = normal_expectation(48, |z1| {
        let xt = front.x_mean + front.x_variance.sqrt() * z1;
        let beta = front.covariance / front.x_variance;
        let mi = front.mean + beta * (xt - front.x_mean);
        let vi = (front.variance - beta * front.covariance).max(0.0);
        let disc = (-mi + 0.5 * vi - h * per.start).exp();
        let back = integrated_factor_law(xt, per.start, per.start, per.end, &p).unwrap();
        let sd = back.variance.sqrt();
        let g = |z2: f64| {
            let j = back.mean + sd * z2;
            (-j - h * per.delta()).exp() * ((j + s * per.delta()).exp() - big_k).max(0.0) * std_normal_pdf(z2)
        };
        let kink = ((big_k.ln() - s * per.delta() - back.mean) / sd).clamp(-12.0, 12.0);
        disc * (adaptive_simpson(g, -12.0, kink, 1e-16) + adaptive_simpson(g, kink, 12.0, 1e-16))
    });
    assert!((closed - oracle).abs() < 1e-10, "{closed} vs {oracle}");
}

#[test]
fn caplet_settlement_and_limits() {
    let model = reference_model();
    let per = Period::new(0.5, 0.75).unwrap();
    let c = FuturesContract::new(per);
    let acc = 0.012;
    let st = futures_state(&model, 0.05, 0.75, &c, Some(acc)).unwrap();
    let spec = CapletSpec::new(per, 0.03, 1.0).unwrap();
    let v = caplet_price(&model, 0.05, 0.75, &spec, &st).unwrap();
    assert!((v - (acc.exp_m1() - 0.25 * 0.03).max(0.0)).abs() < 1e-15);
    let otm = CapletSpec::new(per, 0.09, 1.0).unwrap();
    assert_eq!(caplet_price(&model, 0.05, 0.75, &otm, &st).unwrap(), 0.0);

    // Deep in the money: the caplet is the swap.
    let st0 = futures_state(&model, 0.3, 0.0, &c, None).unwrap();
    let itm = CapletSpec::new(per, 1e-9, 1.0).unwrap();
    let swap = SwapSpec::new(TenorStructure::new(vec![0.5, 0.75]).unwrap(), 1e-9, 1.0, Side::Payer).unwrap();
    let gap = caplet_price(&model, 0.3, 0.0, &itm, &st0).unwrap() - swap_price(&model, 0.3, 0.0, &swap, None).unwrap();
    assert!(gap.abs() < 1e-14);
    assert!(CapletSpec::new(per, 0.0, 1.0).is_err());
}

#[test]
fn cap_examples() {
    let model = reference_model();
    let one = CapSpec::new(TenorStructure::new(vec![0.5, 0.75]).unwrap(), 0.035, 1e6).unwrap();
    let st = futures_state(&model, 0.03, 0.0, &FuturesContract::new(Period::new(0.5, 0.75).unwrap()), None).unwrap();
    let caplet = caplet_price(&model, 0.03, 0.0, &one.caplet(1), &st).unwrap();
    assert_eq!(cap_price(&model, 0.03, 0.0, &one, None).unwrap(), caplet);
    let far = CapSpec::new(TenorStructure::regular(0.5, 0.25, 4).unwrap(), 0.5, 1e6).unwrap();
    assert!(cap_price(&model, 0.03, 0.0, &far, None).unwrap() < 1e-12);
    let coll = one.clone().collateralized(CollateralFraction::full());
    assert!(cap_price(&model, 0.03, 0.0, &coll, None).unwrap() > caplet);
}

#[test]
fn swaption_checks() {
    let model = reference_model();
    let tenor = TenorStructure::regular(1.0, 1.0, 4).unwrap();
    let quad = QuadratureConfig::default();
    let atm = forward_swap_rate(&model, 0.03, 0.0, &tenor, &CollateralFraction::none(), None).unwrap();
    let pay = SwapSpec::new(tenor.clone(), atm + 0.002, 1e6, Side::Payer).unwrap();
    let p = swaption_price(&model, 0.03, 0.0, &pay, &quad).unwrap();
    assert!(p.doubling_difference <= 1e-8);
    assert!(p.exercise_monotone);
    assert!(p.critical_x.is_some());
    assert!((p.price - p.analytic_price).abs() < 1e-10 * 1e6);
    // Payer minus receiver is the forward swap.
    let rec = swaption_price(&model, 0.03, 0.0, &pay.with_side(Side::Receiver), &quad).unwrap();
    let fwd = swap_price(&model, 0.03, 0.0, &pay, None).unwrap();
    assert!((p.price - rec.price - fwd).abs() < 1e-9);

    let far = SwapSpec::new(tenor.clone(), 0.5, 1e6, Side::Payer).unwrap();
    assert!(swaption_price(&model, 0.03, 0.0, &far, &quad).unwrap().price < 1e-9);

    // Always exercised: equals the forward swap.
    let one = SwapSpec::new(TenorStructure::new(vec![1.0, 2.0]).unwrap(), -0.5, 1.0, Side::Payer).unwrap();
    let sw = swaption_price(&model, 0.03, 0.0, &one, &quad).unwrap();
    assert!((sw.price - swap_price(&model, 0.03, 0.0, &one, None).unwrap()).abs() < 1e-12);

    let coarse = QuadratureConfig { nodes: 2, tolerance: 1e-14, width: 12.0 };
    assert!(matches!(swaption_price(&model, 0.03, 0.0, &pay, &coarse), Err(sofr_core::Error::Numerical(_))));
}

#[test]
fn swaption_without_volatility_is_intrinsic() {
    let p = FactorParams::new(0.02, 0.3, 0.0, 0.03).unwrap();
    let model = MarketModel::flat(p, REFERENCE_BASES).unwrap();
    let spec = SwapSpec::new(TenorStructure::regular(1.0, 1.0, 2).unwrap(), 0.01, 1.0, Side::Payer).unwrap();
    let v = swaption_price(&model, 0.03, 0.0, &spec, &QuadratureConfig::default()).unwrap();
    assert!((v.price - swap_price(&model, 0.03, 0.0, &spec, None).unwrap().max(0.0)).abs() < 1e-14);
}

#[test]
fn black_examples() {
    let curve = FlatCurve { t: 0.0, rate: 0.04 };
    let per = Period::new(1.0, 1.25).unwrap();
    let tiny = VolSchedule::flat(1e-12).unwrap();
    let fwd = sofr_core::classical::forward_libor(&curve, per).unwrap();
    let bu = (-0.04f64 * 1.25).exp();
    for k in [0.02, 0.04, 0.06] {
        let c = black_caplet(&curve, &tiny, per, k).unwrap();
        assert!((c - 0.25 * bu * (fwd - k).max(0.0)).abs() < 1e-14);
    }
    let mut last = 0.0;
    for v in [0.05, 0.1, 0.2, 0.4] {
        let c = black_caplet(&curve, &VolSchedule::flat(v).unwrap(), per, 0.04).unwrap();
        assert!(c > last);
        last = c;
        let f = black_floorlet(&curve, &VolSchedule::flat(v).unwrap(), per, 0.04).unwrap();
        assert!(f > 0.0);
    }
}
