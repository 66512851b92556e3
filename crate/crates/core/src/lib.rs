//! Rate regions of the two-user Gaussian multiple-access channel.
//!
//! - [`rates`]: closed-form rates for superposition coding with SIC, time
//!   division and frequency division, under per-user or sum-power budgets.
//! - [`regions`]: the regions as convex polygons, sampled Pareto frontiers,
//!   Hausdorff comparison and the sum-power equivalence check.
//! - [`montecarlo`]: channel simulation and mutual-information estimates
//!   that reproduce the closed forms.
//! - [`cli`]: the `macregion` command-line tool.

pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod rates;
pub mod regions;

pub use channel::{ChannelConfig, PowerBudget, RatePair, ResourceSplit, Scheme};
pub use error::{MacError, Result};
