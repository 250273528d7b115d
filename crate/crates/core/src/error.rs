use thiserror::Error;

use crate::rounding::RoundingOutcome;

pub type Result<T, E = FairError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FairError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no centers")]
    NoCenters,

    #[error("budget unreachable: vol_{point}(r) never reaches {budget}")]
    BudgetUnreachable { point: usize, budget: f64 },

    #[error("infeasible")]
    Infeasible,

    #[error("unbounded")]
    Unbounded,

    #[error("solver stalled after {0} iterations")]
    SolverStalled(usize),

    #[error("solver lost accuracy: constraint residual {0:e}")]
    NumericalFailure(f64),

    #[error("instance too large for the LP solver: n = {n} exceeds {limit}")]
    LpTooLarge { n: usize, limit: usize },

    #[error("restriction requires gamma < 1/2 (got {0})")]
    RestrictionGamma(f64),

    #[error("forest undefined for a support of size {0}")]
    ForestUndefined(usize),

    /// Every rounding trial opened more than `k` centers. The bicriteria
    /// solution `C = P'` is carried along so callers always have an answer.
    #[error("rounding failed after {trials} trials")]
    RoundingFailed {
        trials: usize,
        fallback: Box<RoundingOutcome>,
    },

    #[error("oracle budget exceeded: {count} subsets > {limit}")]
    OracleBudgetExceeded { count: u128, limit: u128 },

    #[error("gap instance too large to enumerate groups (k = {0}, max 9)")]
    GapTooLarge(usize),
}

impl FairError {
    /// True for errors caused by malformed input rather than by a solve.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            FairError::InvalidInstance(_)
                | FairError::InvalidParams(_)
                | FairError::RestrictionGamma(_)
                | FairError::GapTooLarge(_)
                | FairError::LpTooLarge { .. }
        )
    }
}
