//! Benchmark-only crate; see `benches/engines.rs`. Run with `cargo bench`.
