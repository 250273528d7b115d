use std::fmt;

use serde::{Deserialize, Serialize};

use super::cluster::{beyond_radius, FractionalSolution};
use crate::error::Result;
use crate::instance::{delta_radii, Demands, MetricInstance};

/// The constraint families of the clustering LP, numbered as usual:
/// (1) assignment, (2) center count, (3) capacity, (4) radius bound,
/// (5) variable bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpConstraint {
    Assignment,
    CenterCount,
    Capacity,
    RadiusBound,
    Bounds,
}

impl LpConstraint {
    pub fn number(self) -> u8 {
        match self {
            LpConstraint::Assignment => 1,
            LpConstraint::CenterCount => 2,
            LpConstraint::Capacity => 3,
            LpConstraint::RadiusBound => 4,
            LpConstraint::Bounds => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: LpConstraint,
    pub point: Option<usize>,
    pub center: Option<usize>,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint ({})", self.constraint.number())?;
        match (self.point, self.center) {
            (Some(u), Some(v)) => write!(f, " at ({u},{v})")?,
            (Some(u), None) => write!(f, " at {u}")?,
            (None, Some(v)) => write!(f, " at center {v}")?,
            (None, None) => {}
        }
        write!(f, ": off by {:.3e}", self.magnitude)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst(&self) -> f64 {
        self.violations.iter().map(|v| v.magnitude).fold(0.0, f64::max)
    }

    pub fn of(&self, c: LpConstraint) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.constraint == c)
    }
}

/// Checks `sol` against the strengthened LP for budget `z` and multiplier
/// `lambda`, with radius bounds active on the instance's own demands.
pub fn check_feasibility(
    inst: &MetricInstance,
    sol: &FractionalSolution,
    z: f64,
    lambda: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    check_feasibility_with(inst, inst.weights(), sol, z, lambda, tol)
}

/// As [`check_feasibility`], but the radius bound applies to the rows with
/// positive demand under `active`. Radii are always taken from the
/// instance's original demands.
pub fn check_feasibility_with(
    inst: &MetricInstance,
    active: &Demands,
    sol: &FractionalSolution,
    z: f64,
    lambda: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    let n = inst.n();
    let mut violations = Vec::new();
    let mut push = |constraint, point, center, magnitude: f64| {
        violations.push(Violation {
            constraint,
            point,
            center,
            magnitude,
        })
    };

    for (u, row) in sol.x.iter().enumerate() {
        let gap = (row.iter().sum::<f64>() - 1.0).abs();
        if gap > tol {
            push(LpConstraint::Assignment, Some(u), None, gap);
        }
    }
    let excess = sol.y.iter().sum::<f64>() - inst.k() as f64;
    if excess > tol {
        push(LpConstraint::CenterCount, None, None, excess);
    }
    for (u, row) in sol.x.iter().enumerate() {
        for (v, &x) in row.iter().enumerate() {
            if x - sol.y[v] > tol {
                push(LpConstraint::Capacity, Some(u), Some(v), x - sol.y[v]);
            }
            if x < -tol {
                push(LpConstraint::Bounds, Some(u), Some(v), -x);
            }
        }
    }
    for (v, &y) in sol.y.iter().enumerate() {
        if y < -tol {
            push(LpConstraint::Bounds, None, Some(v), -y);
        } else if y > 1.0 + tol {
            push(LpConstraint::Bounds, None, Some(v), y - 1.0);
        }
    }
    if lambda.is_finite() {
        let radii = delta_radii(inst, z)?;
        for u in (0..n).filter(|&u| active.total(u) > 0.0) {
            for v in 0..n {
                let x = sol.x[u][v];
                if x > tol && beyond_radius(inst.dist(u, v), lambda * radii[u]) {
                    push(LpConstraint::RadiusBound, Some(u), Some(v), x);
                }
            }
        }
    }
    Ok(FeasibilityReport { violations })
}
