//! Truncated Monte Carlo and quasi-Monte Carlo estimation of posterior
//! normalizing constants and mixed-model marginal likelihoods.
//!
//! The crate is organized bottom-up:
//!
//! - [`sequences`]: Halton and seeded uniform point sets, prime bases.
//! - [`discrepancy`]: local / exact star discrepancy and Halton bounds.
//! - [`model`]: the posterior abstraction, conjugate Gaussian oracles, Newton mode finder.
//! - [`integrate`]: truncation regions and the truncated estimator.
//! - [`bounds`]: evaluators for the MC / QMC error bounds.
//! - [`marginal`]: per-group marginal likelihoods and the approximate MMLE.
//! - [`experiments`]: the simulation-table harness.
//! - [`cli`]: the `normconst` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod discrepancy;
pub mod error;
pub mod experiments;
pub mod integrate;
pub mod marginal;
pub mod model;
pub mod numerics;
pub mod sequences;

pub use error::{Error, Result};
