//! Benchmark-only crate; see `benches/sopi_ops.rs`.
