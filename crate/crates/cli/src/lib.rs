//! Experiment harness around the slabflow solvers: configuration parsing,
//! run manifests, and the runners behind the command line tool.

pub mod config;
pub mod manifest;
pub mod runner;
