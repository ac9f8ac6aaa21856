//! Experiment harness around the `club-cascade` library: configuration,
//! seeded multi-run execution, CSV metric logging, and bound-check
//! reporting. The `club-cascade` binary is a thin shell over these modules.

pub mod config;
pub mod report;
pub mod rng;
pub mod runner;
