//! Criterion benchmarks for `mstclust-core` live in `benches/`.
