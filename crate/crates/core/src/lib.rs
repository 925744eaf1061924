//! Bandits with heavy-tailed, piecewise-stationary rewards.
//!
//! * [`estimators`]: Catoni-type and median-of-means estimators.
//! * [`confseq`]: stitched Catoni confidence sequences and an
//!   empirical-Bernstein baseline.
//! * [`detection`]: change detection by intersecting confidence sequences.
//! * [`environments`]: reward distributions, instances, price-data fitting.
//! * [`policies`]: Robust-CPD-UCB and baseline index policies.
//! * [`harness`]: trial runner, regret ledger, bounds and result files.
//! * [`cli`]: the `robust-cpd` command-line front end.

pub mod cli;
pub mod confseq;
pub mod detection;
pub mod environments;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod policies;

pub use error::{Error, Result};
