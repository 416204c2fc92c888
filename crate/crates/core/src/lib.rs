//! Infectious-probability engine for a susceptible individual at the centre of a
//! disk-shaped wireless cell surrounded by `N` randomly placed, optionally mobile,
//! infected individuals.
//!
//! The crate computes the probability that the aggregate received virus strength
//! `sum V_i * r_i^-eta` reaches a threshold, both analytically (dominant
//! nearest individual treated exactly, the remaining ones through a Gaussian
//! approximation) and by direct Monte-Carlo simulation.
//!
//! Module map:
//! - [`scenario`]: experiment parameters, validation and the key/value config format
//! - [`distributions`]: distance laws (uniform disk, nearest-of-N, random walk, random waypoint)
//! - [`moments`]: conditional mean/variance of the minor-individual aggregate
//! - [`analytic`]: Q-function, infectious probability per mobility model, total risk
//! - [`mobility`]: trajectory generators for the three mobility models
//! - [`montecarlo`]: simulation estimates and empirical distance laws
//! - [`quadrature`] and [`stats`]: numerical support

// `!(x > 0.0)` style guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod distributions;
mod error;
pub mod mobility;
pub mod moments;
pub mod montecarlo;
pub mod quadrature;
pub mod scenario;
pub mod stats;

pub use error::{Error, Result};
pub use scenario::{McSettings, MobilityParams, ScenarioConfig};

/// Crate version, used in output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
