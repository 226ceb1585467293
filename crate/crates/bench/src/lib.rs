//! Criterion benchmarks for the ABRD engine and the cost-sharing kernels.
//! See `benches/`.
