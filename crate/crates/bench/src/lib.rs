//! Criterion benchmarks for the codec and the bound evaluators live in `benches/`.
