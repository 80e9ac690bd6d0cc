use criterion::{criterion_group, criterion_main, Criterion};
use sofr_core::curves::{CollateralFraction, MarketModel};
use sofr_core::futures::{futures_state, FuturesContract, Period};
use sofr_core::mc::{mc_expectation, SimConfig};
use sofr_core::options::{caplet_price, swaption_price, CapletSpec, QuadratureConfig};
use sofr_core::swaps::{forward_swap_rate, swap_price, Side, SwapSpec, TenorStructure};
use sofr_core::vasicek::FactorParams;
use std::hint::black_box;

fn model() -> MarketModel {
    let p = FactorParams::new(0.02, 0.3, 0.01, 0.03).unwrap();
    MarketModel::flat(p, [-0.0005, 0.0, 0.003, 0.0, 0.001]).unwrap()
}

fn closed_forms(c: &mut Criterion) {
    let m = model();
    let per = Period::new(0.5, 0.75).unwrap();
    let contract = FuturesContract::new(per);
    c.bench_function("futures_state", |b| b.iter(|| futures_state(&m, black_box(0.03), 0.0, &contract, None)));

    let swap = SwapSpec::new(TenorStructure::regular(0.25, 0.25, 20).unwrap(), 0.035, 1.0, Side::Payer)
        .unwrap()
        .collateralized(CollateralFraction::constant(0.5).unwrap());
    c.bench_function("swap_price 20 legs", |b| b.iter(|| swap_price(&m, black_box(0.03), 0.0, &swap, None)));

    let cap = CapletSpec::new(per, 0.035, 1.0).unwrap();
    let st = futures_state(&m, 0.03, 0.0, &contract, None).unwrap();
    c.bench_function("caplet_price", |b| b.iter(|| caplet_price(&m, black_box(0.03), 0.0, &cap, &st)));

    let tenor = TenorStructure::regular(1.0, 1.0, 5).unwrap();
    let atm = forward_swap_rate(&m, 0.03, 0.0, &tenor, &CollateralFraction::none(), None).unwrap();
    let sw = SwapSpec::new(tenor, atm, 1.0, Side::Payer).unwrap();
    let quad = QuadratureConfig::default();
    c.bench_function("swaption 1y x 5y", |b| b.iter(|| swaption_price(&m, black_box(0.03), 0.0, &sw, &quad)));
}

fn monte_carlo(c: &mut Criterion) {
    let m = model();
    let grid: Vec<f64> = (0..=4).map(|k| 0.25 * k as f64).collect();
    let cfg = SimConfig::new(1, 10_000, grid);
    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    g.bench_function("10k paths x 4 steps", |b| b.iter(|| mc_expectation(&m.factor, &cfg, |p| Ok(p.factor[4]))));
    g.finish();
}

criterion_group!(benches, closed_forms, monte_carlo);
criterion_main!(benches);
