//! Criterion benchmarks for the sampler, the wavelet transform, Besov norms
//! and characteristic-function moments. Run with `cargo bench -p levy-besov-bench`.
