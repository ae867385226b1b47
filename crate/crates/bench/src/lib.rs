//! Criterion benchmarks for `consensus-core`; see `benches/analysis.rs`.
