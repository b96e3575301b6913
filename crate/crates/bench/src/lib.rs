//! Criterion benchmarks for the simulator and formula kernels; see `benches/`.
