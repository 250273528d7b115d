//! Socially fair clustering: choose `k` centers minimizing the largest
//! per-group `sum w_j(u) d(u, C)^p`.
//!
//! The pipeline solves a strengthened LP relaxation, consolidates demands
//! and openings onto a well-separated support, and rounds the result with
//! a nearest-neighbor forest. [`oracle`] supplies exact answers on small
//! instances and [`generators`] builds test families.

pub mod checks;
pub mod consolidation;
pub mod error;
pub mod format;
pub mod generators;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod rounding;

pub use error::{FairError, Result};
pub use instance::{fair_cost, group_costs, AlgorithmParams, CenterSet, Demands, MetricInstance};
pub use rounding::{bicriteria_round, run_main, RoundingOutcome};
