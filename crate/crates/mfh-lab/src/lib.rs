//! mfh-lab: a numerical laboratory for crossmodal knowledge distillation.
//!
//! The crate builds controllable synthetic multimodal datasets, trains
//! teachers and students with a deterministic full-batch GD loop, ranks
//! channels by their contribution to crossmodal alignment, nullifies
//! channels to isolate what actually transfers, and verifies an upper
//! bound on the distillation risk with per-instance certificates.
//!
//! Entry points:
//! - [`mvd`]: dataset geometry, builders, and sampling.
//! - [`model`] / [`losses`]: classifiers, losses, and the GD loop.
//! - [`kd`]: the distillation objective and student training.
//! - [`ranking`]: joint training, channel salience, nullification plans.
//! - [`theory`]: the risk bound and its verification certificates.
//! - [`experiments`]: seeded sweeps that write CSV results.
//! - [`cli`] / [`report`]: command-line front end and SVG reports.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod experiments;
pub mod kd;
pub mod linalg;
pub mod losses;
pub mod model;
pub mod mvd;
pub mod ranking;
pub mod report;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};

/// Library version, recorded in run-metadata sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
