//! Reward environments: per-arm distributions, piecewise-stationary
//! instances, the lower-bound construction and instances fitted to price
//! data.

pub mod distributions;
pub mod instance;
pub mod lower_bound;
pub mod prices;
pub mod quadrature;
pub mod segmentation;

pub use distributions::{make_shifted_pareto, ArmDistribution};
pub use instance::{GapSummary, InstanceSpec, NoiseFamily};
pub use lower_bound::lower_bound_instance;
pub use prices::{instance_from_prices, load_price_csv};
pub use segmentation::fit_piecewise_constant;
