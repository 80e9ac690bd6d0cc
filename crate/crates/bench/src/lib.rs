//! Benchmarks for `sofr-core`; see `benches/`.
