//! Criterion benchmarks for the estimation and detection pipelines live in `benches/`.
