//! Criterion benchmarks for `passage-core`; see `benches/propagation.rs`.
