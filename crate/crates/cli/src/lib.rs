//! Experiment-runner plumbing behind the `cfkit` binary: configuration
//! resolution (flags over optional key=value config file) and the
//! composition of load → split → pipeline → measures → grids.

pub mod config;
pub mod experiment;
