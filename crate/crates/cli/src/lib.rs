//! Command-line front end: configuration, experiment runners and report writers.

pub mod config;
pub mod experiments;
pub mod output;
