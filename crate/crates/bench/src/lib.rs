//! Criterion benchmarks for `levy-core`; see `benches/`.
