//! Benchmark-only crate; see `benches/laver.rs`.
