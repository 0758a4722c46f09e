//! Criterion benchmarks for the layout stages; see `benches/pipeline.rs`.
//!
//! ```text
//! cargo bench -p mixmap-bench
//! ```
