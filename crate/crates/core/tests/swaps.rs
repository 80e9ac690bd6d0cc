mod common;

use common::*;
use proptest::prelude::*;
use sofr_core::classical::{libor_swap_mtm, libor_swap_price, libor_swap_rate, FlatCurve, TabulatedCurve};
use sofr_core::curves::{synthetic_bond, CollateralFraction, Discounting, MarketModel, RateLabel};
use sofr_core::futures::{futures_state, FuturesContract, Period};
use sofr_core::swaps::{
    forward_swap_rate, swap_legs, swap_price, swap_price_futures_repr, Side, SwapSpec, TenorStructure,
};
use sofr_core::Error;

fn tenor(dates: &[f64]) -> TenorStructure {
    TenorStructure::new(dates.to_vec()).unwrap()
}

#[test]
fn equal_sofr_and_funding_gives_the_classical_shape() {
    let model = MarketModel::flat(reference_params(), [-0.0005, 0.0, 0.003, 0.0, -0.0005]).unwrap();
    let spec = SwapSpec::new(tenor(&[0.5, 0.75]), 0.04, 1.0, Side::Payer).unwrap();
    let bs = |m: f64| synthetic_bond(&model, &Discounting::Rate(RateLabel::Sofr), 0.03, 0.1, m, None).unwrap();
    let v = swap_price(&model, 0.03, 0.1, &spec, None).unwrap();
    assert!((v - (bs(0.5) - 1.01 * bs(0.75))).abs() < 1e-15);
}

#[test]
fn price_is_cum_coupon_at_the_payment_date() {
    let model = reference_model();
    let spec = SwapSpec::new(tenor(&[0.5, 0.75]), 0.04, 1e6, Side::Payer).unwrap();
    let acc = 0.0102;
    let hist = FixedAccrual { from: 0.5, value: acc };
    let realized = acc + model.s.integral(0.5, 0.75);
    let v = swap_price(&model, 0.05, 0.75, &spec, Some(&hist)).unwrap();
    assert!((v - 1e6 * (realized.exp_m1() - 0.25 * 0.04)).abs() < 1e-9);
    let st = futures_state(&model, 0.05, 0.75, &FuturesContract::new(Period::new(0.5, 0.75).unwrap()), Some(realized)).unwrap();
    let w = swap_price_futures_repr(&model, 0.05, 0.75, &st, &spec).unwrap();
    assert!((w - v).abs() < 1e-9);
    assert!(swap_price(&model, 0.05, 0.8, &spec, Some(&hist)).is_err());
}

#[test]
fn in_period_legs_need_history() {
    let model = reference_model();
    let spec = SwapSpec::new(tenor(&[0.25, 0.5, 0.75]), 0.04, 1.0, Side::Payer).unwrap();
    assert!(matches!(swap_price(&model, 0.03, 0.3, &spec, None), Err(Error::MissingHistory(_))));
    let legs = swap_legs(&model, 0.03, 0.6, &spec.tenor, &spec.collateral, Some(&FixedAccrual { from: 0.5, value: 0.003 })).unwrap();
    assert_eq!(legs.len(), 1);
    assert_eq!(legs[0].index, 2);
    assert!(legs[0].in_period);
}

#[test]
fn multi_period_matches_bond_decomposition() {
    // Each leg: A^{s,beta} B^beta(t, T_{j-1}) - (1 + delta kappa) B^beta(t, T_j), built from
    // the bond closed form and the basis integrals directly.
    let model = reference_model();
    let b = 0.3;
    let coll = CollateralFraction::constant(b).unwrap();
    let spec = SwapSpec::new(TenorStructure::regular(0.5, 0.5, 5).unwrap(), 0.037, 1.0, Side::Receiver)
        .unwrap()
        .collateralized(coll.clone());
    let alpha_beta = (1.0 - b) * 0.001 + b * 0.0;
    let p = model.factor;
    let bond = |m: f64| {
        let mean = ode_integral(&p, 0.028, 0.2, m);
        let var = p.sigma * p.sigma * adaptive_simpson(|s| n_direct(p.b, s).powi(2), 0.0, m - 0.2, 1e-18);
        (-mean + 0.5 * var - alpha_beta * (m - 0.2)).exp()
    };
    let mut v = 0.0;
    for per in spec.tenor.periods() {
        let a = ((-0.0005 - alpha_beta) * per.delta()).exp();
        v += a * bond(per.start) - (1.0 + per.delta() * 0.037) * bond(per.end);
    }
    let price = swap_price(&model, 0.028, 0.2, &spec, None).unwrap();
    assert!((price + v).abs() < 1e-12, "{price} vs {}", -v);
}

#[test]
fn collateral_is_irrelevant_when_rates_coincide() {
    let model = MarketModel::flat(reference_params(), [-0.0005, 0.0, 0.003, 0.002, 0.002]).unwrap();
    let t = TenorStructure::regular(0.25, 0.25, 6).unwrap();
    let r0 = forward_swap_rate(&model, 0.03, 0.0, &t, &CollateralFraction::none(), None).unwrap();
    let r1 = forward_swap_rate(&model, 0.03, 0.0, &t, &CollateralFraction::full(), None).unwrap();
    assert_eq!(r0, r1);
}

#[test]
fn zero_bases_single_period_rate_is_the_simple_forward() {
    let model = MarketModel::flat(reference_params(), [0.0; 5]).unwrap();
    let t = tenor(&[1.0, 1.5]);
    let d = Discounting::Rate(RateLabel::Funding);
    let b = |m: f64| synthetic_bond(&model, &d, 0.03, 0.25, m, None).unwrap();
    let r = forward_swap_rate(&model, 0.03, 0.25, &t, &CollateralFraction::none(), None).unwrap();
    assert!((r - (b(1.0) / b(1.5) - 1.0) / 0.5).abs() < 1e-14);
}

#[test]
fn futures_form_is_single_period_only() {
    let model = reference_model();
    let spec = SwapSpec::new(tenor(&[0.25, 0.5, 0.75]), 0.04, 1.0, Side::Payer).unwrap();
    let st = futures_state(&model, 0.03, 0.0, &FuturesContract::new(Period::new(0.25, 0.5).unwrap()), None).unwrap();
    assert!(matches!(swap_price_futures_repr(&model, 0.03, 0.0, &st, &spec), Err(Error::Unsupported(_))));
}

#[test]
fn classical_suite() {
    let flat = FlatCurve { t: 0.0, rate: 0.035 };
    let t = TenorStructure::regular(1.0, 0.5, 4).unwrap();
    let k = libor_swap_rate(&flat, &t).unwrap();
    assert!(libor_swap_price(&flat, &t, k).unwrap().abs() < 1e-15);
    let mut rng = Lcg(17);
    for _ in 0..50 {
        let mut pts = Vec::new();
        let mut b = 1.0;
        for &m in t.dates() {
            b *= (-rng.range(0.0, 0.05) * 0.5).exp();
            pts.push((m, b));
        }
        let curve = TabulatedCurve { t: 0.0, points: pts };
        let kappa = rng.range(0.0, 0.06);
        let telescoped = libor_swap_price(&curve, &t, kappa).unwrap();
        assert!((libor_swap_mtm(&curve, &t, kappa).unwrap() - telescoped).abs() < 1e-12);
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(TenorStructure::new(vec![1.0]).is_err());
    assert!(TenorStructure::new(vec![1.0, 0.5]).is_err());
    assert!(SwapSpec::new(tenor(&[0.0, 1.0]), 0.03, 0.0, Side::Payer).is_err());
    assert!(SwapSpec::new(tenor(&[0.0, 1.0]), f64::NAN, 1.0, Side::Payer).is_err());
}

proptest! {
    #[test]
    fn payer_and_receiver_offset(x in -0.02f64..0.1, t in 0.0f64..0.5, kappa in 0.0f64..0.08, beta in 0.0f64..1.0, n in 1usize..6) {
        let model = reference_model();
        let spec = SwapSpec::new(TenorStructure::regular(0.5, 0.25, n).unwrap(), kappa, 1e6, Side::Payer)
            .unwrap()
            .collateralized(CollateralFraction::constant(beta).unwrap());
        let pay = swap_price(&model, x, t, &spec, None).unwrap();
        let rec = swap_price(&model, x, t, &spec.with_side(Side::Receiver), None).unwrap();
        prop_assert_eq!(pay, -rec);
        // Paying more fixed is worth less.
        let dearer = swap_price(&model, x, t, &spec.with_fixed_rate(kappa + 0.001), None).unwrap();
        prop_assert!(dearer < pay);
    }
}
