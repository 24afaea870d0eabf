//! Benchmark harness: suite runs over planner modes and completion
//! backends, and the metric tables built from their episodes.

pub mod metrics;
pub mod runner;
