//! IO, providers, CLI, and HTTP service around the `rca-core` pipeline.

pub mod cli;
pub mod config;
pub mod http;
pub mod io;
pub mod pipeline;
pub mod providers;
