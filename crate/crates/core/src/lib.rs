//! Regression laboratory comparing two ways of designing a training loss:
//! optimizing the target metric directly, or fitting a conditional
//! distribution by maximum likelihood and then reading off the statistic
//! that is optimal for the metric at prediction time.
//!
//! The crate is organised bottom-up:
//!
//! - [`distributions`]: Poisson, Pareto, negative binomial and the
//!   zero/NB/Pareto mixture, with densities, samplers and KL divergences.
//! - [`linear_model`]: fixed designs, the constrained parameter set and its
//!   projection, the affine link layer and the excess-risk functional.
//! - [`estimators`]: least squares, subgradient metric optimization, Poisson
//!   and Pareto maximum likelihood, median-of-means and the mixture trainer.
//! - [`inference`]: Monte-Carlo post-hoc statistics.
//! - [`metrics`]: dataset-level evaluation metrics.
//! - [`simharness`]: synthetic designs, assumption diagnostics and the
//!   Monte-Carlo excess-risk runner.
//! - [`cli`]: the `mlelab` command-line front end.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod inference;
pub mod linalg;
pub mod linear_model;
pub mod metrics;
pub mod rng;
pub mod simharness;

pub use error::{Error, Result};
