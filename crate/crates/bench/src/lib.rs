//! Criterion benchmark crate; see the `benches/` directory.
