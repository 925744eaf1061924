//! Experiment harness: trial runner, regret bookkeeping, detection-delay
//! experiments, theoretical bounds and result files.

pub mod bounds;
pub mod config;
pub mod delay;
pub mod emit;
pub mod experiment;
pub mod ledger;

pub use bounds::{check_assumption, lower_bound, theoretical_bounds, AssumptionReport, BoundReport};
pub use config::{DetectConfig, ExperimentConfig};
pub use delay::{detection_delay_experiment, DelayReport};
pub use emit::emit_results;
pub use experiment::{run_experiment, run_trial, ExperimentResults, PolicySummary};
pub use ledger::{exact_sum, RegretLedger};
