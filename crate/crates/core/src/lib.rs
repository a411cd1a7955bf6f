//! Detection of mechanistic interaction (coaction) between two causal factors
//! on a binary outcome.
//!
//! - [`mechanism`]: exact checks on tabulated deterministic response functions.
//! - [`adag`]: augmented DAGs with regime indicators, d-separation and the
//!   identifiability conditions for testing on non-experimental data.
//! - [`estimation`]: the excess-risk statistic from data, by stratified
//!   proportions, linear-risk or linear-odds regression, or bootstrap.
//! - [`simulator`]: exact population risks, synthetic data and the soundness
//!   experiment for the excess-risk criterion.

pub mod adag;
pub mod error;
pub mod estimation;
pub mod mechanism;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
