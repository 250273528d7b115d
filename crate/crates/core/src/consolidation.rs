//! Turning an optimal LP solution into a restricted one on a well-separated
//! support.
//!
//! Location consolidation moves demand onto points with small fractional
//! radius until the remaining support `P'` is well separated. Center
//! consolidation then moves every fractional opening outside `P'` onto its
//! nearest support point, after which each support point is at least
//! `(1 - gamma)` open. The restriction step finally rewrites each support
//! row to serve itself and its forest neighbor only.

use serde::{Deserialize, Serialize};

use crate::error::{FairError, Result};
use crate::instance::{Demands, MetricInstance};
use crate::lp::FractionalSolution;
use crate::rounding::Forest;

/// `R(u) = (sum_v d(u,v)^p x[u][v])^(1/p)`.
pub fn fractional_radii(inst: &MetricInstance, sol: &FractionalSolution) -> Vec<f64> {
    let p = inst.p();
    sol.x
        .iter()
        .enumerate()
        .map(|(u, row)| {
            let s: f64 = row
                .iter()
                .enumerate()
                .map(|(v, &x)| inst.dist_pow(u, v) * x)
                .sum();
            s.max(0.0).powf(1.0 / p)
        })
        .collect()
}

/// Multiplier `2 / gamma^(1/p)` of the move rule and the separation bound.
pub fn separation_factor(gamma: f64, p: f64) -> f64 {
    2.0 / gamma.powf(1.0 / p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationResult {
    pub radii: Vec<f64>,
    pub demands: Demands,
    /// `P'`: points keeping positive demand, ascending.
    pub support: Vec<usize>,
    /// Where each point's demand ended up (itself if never moved).
    pub move_map: Vec<usize>,
    pub gamma: f64,
}

impl ConsolidationResult {
    pub fn in_support(&self, u: usize) -> bool {
        self.support.binary_search(&u).is_ok()
    }
}

/// Consolidates demands of `sol`.
///
/// Points are scanned in non-decreasing order of `R` (ties by index). While
/// processing `v_i`, which must still hold demand, every later `v_j` with
/// demand and `d(v_i, v_j) <= 2 / gamma^(1/p) * R(v_j)` hands all of its
/// demand to `v_i`.
pub fn consolidate_locations(inst: &MetricInstance, sol: &FractionalSolution, gamma: f64) -> ConsolidationResult {
    let n = inst.n();
    let radii = fractional_radii(inst, sol);
    let factor = separation_factor(gamma, inst.p());

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));

    let mut demands = inst.weights().clone();
    let mut move_map: Vec<usize> = (0..n).collect();
    let ell = demands.num_groups();
    for i in 0..n.saturating_sub(1) {
        let vi = order[i];
        if demands.total(vi) <= 0.0 {
            continue;
        }
        for &vj in &order[i + 1..] {
            if demands.total(vj) > 0.0 && inst.dist(vi, vj) <= factor * radii[vj] {
                for t in 0..ell {
                    let moved = demands.get(t, vi) + demands.get(t, vj);
                    demands.set(t, vi, moved);
                    demands.set(t, vj, 0.0);
                }
                move_map[vj] = vi;
            }
        }
    }
    let support = demands.support();
    ConsolidationResult {
        radii,
        demands,
        support,
        move_map,
        gamma,
    }
}

/// Per-group LP cost of `sol` under `weights`, and its maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpCost {
    pub per_group: Vec<f64>,
    pub max: f64,
}

pub fn lp_cost_under(inst: &MetricInstance, sol: &FractionalSolution, weights: &Demands) -> LpCost {
    let per_group = sol.group_costs(inst, weights);
    let max = per_group.iter().copied().fold(0.0, f64::max);
    LpCost { per_group, max }
}

/// Moves every opening outside `P'` to its nearest support point (lowest
/// index on ties), capping openings at 1 and merging the matching
/// assignment columns.
///
/// Columns are merged for all rows, not only support rows, so the output
/// keeps `x <= y` everywhere; rows outside `P'` carry no demand under the
/// consolidated weights and do not affect the cost. The objective of the
/// result is measured under the consolidated demands.
pub fn consolidate_centers(
    inst: &MetricInstance,
    cons: &ConsolidationResult,
    sol: &FractionalSolution,
) -> FractionalSolution {
    let n = inst.n();
    let mut x = sol.x.clone();
    let mut y = sol.y.clone();
    if !cons.support.is_empty() {
        for v in (0..n).filter(|&v| !cons.in_support(v)) {
            let target = nearest_in(inst, v, &cons.support);
            y[target] = (y[target] + y[v]).min(1.0);
            y[v] = 0.0;
            for row in x.iter_mut() {
                row[target] += row[v];
                row[v] = 0.0;
            }
        }
    }
    let mut out = FractionalSolution { x, y, objective: 0.0 };
    out.objective = out.max_cost(inst, &cons.demands);
    out
}

fn nearest_in(inst: &MetricInstance, v: usize, set: &[usize]) -> usize {
    *set.iter()
        .min_by(|&&a, &&b| inst.dist(v, a).total_cmp(&inst.dist(v, b)).then(a.cmp(&b)))
        .expect("non-empty set")
}

/// The two-valued solution on `P'`: each support point `v` keeps `y'_v` of
/// itself and sends `1 - y'_v` to its forest neighbor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSolution {
    pub y_prime: Vec<f64>,
    /// Forest neighbor `v'` of each support point.
    pub neighbor: Vec<Option<usize>>,
    /// Full assignment matrix; rows outside `P'` are copied unchanged.
    pub x_dd: FractionalSolution,
}

impl RestrictedSolution {
    pub fn stay(&self, v: usize) -> f64 {
        self.x_dd.x[v][v]
    }

    pub fn to_neighbor(&self, v: usize) -> f64 {
        self.neighbor[v].map_or(0.0, |u| self.x_dd.x[v][u])
    }
}

pub fn restrict_solution(
    inst: &MetricInstance,
    cons: &ConsolidationResult,
    sol_prime: &FractionalSolution,
    gamma: f64,
    forest: &Forest,
) -> Result<RestrictedSolution> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(FairError::RestrictionGamma(gamma));
    }
    let n = inst.n();
    let y_prime = sol_prime.y.clone();
    let mut x = sol_prime.x.clone();
    let mut neighbor = vec![None; n];
    for &v in &cons.support {
        let row = &mut x[v];
        row.iter_mut().for_each(|e| *e = 0.0);
        match forest.partner(v) {
            Some(u) => {
                let stay = y_prime[v].clamp(0.0, 1.0);
                row[v] = stay;
                row[u] = 1.0 - stay;
                neighbor[v] = Some(u);
            }
            None => row[v] = 1.0,
        }
    }
    let mut x_dd = FractionalSolution {
        x,
        y: y_prime.clone(),
        objective: 0.0,
    };
    x_dd.objective = x_dd.max_cost(inst, &cons.demands);
    Ok(RestrictedSolution {
        y_prime,
        neighbor,
        x_dd,
    })
}
