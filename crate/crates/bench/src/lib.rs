//! Shared fixtures for the pipeline benchmarks.
