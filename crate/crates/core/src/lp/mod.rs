//! The clustering LP relaxations and the solver behind them.

mod cluster;
mod feasibility;
pub mod simplex;

pub use cluster::{
    build_basic_lp, build_cluster_lp, solve_lp, solve_lp_with, ClusterLpModel, FractionalSolution,
    MAX_LP_POINTS,
};
pub use feasibility::{check_feasibility, check_feasibility_with, FeasibilityReport, LpConstraint, Violation};
pub use simplex::{DenseSimplex, LinearProgram, LpSolution, LpSolver, Relation};

