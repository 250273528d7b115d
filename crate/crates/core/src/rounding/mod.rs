//! From a restricted LP solution to an integral center set.

mod driver;
mod forest;
mod sample;

pub use driver::{
    bicriteria_limit, bicriteria_round, run_main, ApproxRun, BicriteriaRun, Pipeline, RoundingStage, TrialSummary,
};
pub use forest::Forest;
pub use sample::{
    choose_s, open_support, randomized_round, trial_count, trial_rng, RoundingOutcome, RoundingPlan,
};
