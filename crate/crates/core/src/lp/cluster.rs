use serde::{Deserialize, Serialize};

use super::simplex::{DenseSimplex, LinearProgram, LpSolver, Relation};
use crate::error::{FairError, Result};
use crate::instance::{delta_radii, CenterSet, Demands, MetricInstance};

/// Largest instance the bundled dense solver accepts.
pub const MAX_LP_POINTS: usize = 60;

/// Relative slack used when deciding whether `d(u,v) > lambda * Delta(v)`.
pub(crate) const RADIUS_SLACK: f64 = 1e-9;

pub(crate) fn beyond_radius(d: f64, bound: f64) -> bool {
    d > bound + RADIUS_SLACK * bound.max(1.0)
}

/// Fractional assignment `x[u][v]` of client `u` to center `v` and
/// openings `y[v]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Max per-group LP cost of `x` under the demands it was produced for.
    pub objective: f64,
}

impl FractionalSolution {
    /// The integral solution of `centers`: every point is assigned to its
    /// nearest center (lowest index on ties).
    pub fn indicator(inst: &MetricInstance, centers: &CenterSet) -> Result<Self> {
        if centers.is_empty() {
            return Err(FairError::NoCenters);
        }
        let n = inst.n();
        let mut x = vec![vec![0.0; n]; n];
        let mut y = vec![0.0; n];
        for c in centers.iter() {
            y[c] = 1.0;
        }
        for (u, row) in x.iter_mut().enumerate() {
            let best = centers
                .iter()
                .min_by(|&a, &b| inst.dist(u, a).total_cmp(&inst.dist(u, b)))
                .expect("non-empty");
            row[best] = 1.0;
        }
        let mut sol = FractionalSolution { x, y, objective: 0.0 };
        sol.objective = sol.max_cost(inst, inst.weights());
        Ok(sol)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// `sum_{u,v} w_j(u) d(u,v)^p x[u][v]` for every group.
    pub fn group_costs(&self, inst: &MetricInstance, weights: &Demands) -> Vec<f64> {
        let per_point: Vec<f64> = self
            .x
            .iter()
            .enumerate()
            .map(|(u, row)| {
                row.iter()
                    .enumerate()
                    .map(|(v, &x)| x * inst.dist_pow(u, v))
                    .sum()
            })
            .collect();
        weights
            .groups()
            .map(|g| g.iter().zip(&per_point).map(|(w, c)| w * c).sum())
            .collect()
    }

    pub fn max_cost(&self, inst: &MetricInstance, weights: &Demands) -> f64 {
        self.group_costs(inst, weights).into_iter().fold(0.0, f64::max)
    }
}

/// The min-max clustering LP, linearized with an epigraph variable.
///
/// Variable layout: the unfixed `x[u][v]` in row-major order, then `y[0..n]`,
/// then the scaled objective variable `A / scale`.
#[derive(Debug, Clone)]
pub struct ClusterLpModel {
    pub program: LinearProgram,
    pub budget: f64,
    pub lambda: f64,
    /// `Delta_z(v)` per point; empty for the basic relaxation.
    pub radii: Vec<f64>,
    x_index: Vec<Vec<Option<usize>>>,
    y_offset: usize,
    a_index: usize,
    scale: f64,
}

impl ClusterLpModel {
    pub fn n(&self) -> usize {
        self.x_index.len()
    }

    /// Number of `x` variables eliminated by the radius bound.
    pub fn fixed_count(&self) -> usize {
        self.x_index.iter().flatten().filter(|i| i.is_none()).count()
    }

    pub fn is_fixed(&self, u: usize, v: usize) -> bool {
        self.x_index[u][v].is_none()
    }

    /// Upper bound on the objective, used to normalize the group rows.
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// The relaxation without radius bounds.
pub fn build_basic_lp(inst: &MetricInstance) -> Result<ClusterLpModel> {
    build_cluster_lp(inst, 0.0, f64::INFINITY)
}

/// Builds the strengthened relaxation for budget `z` and radius multiplier
/// `lambda`; `lambda = inf` gives the basic relaxation.
pub fn build_cluster_lp(inst: &MetricInstance, z: f64, lambda: f64) -> Result<ClusterLpModel> {
    let n = inst.n();
    if n > MAX_LP_POINTS {
        return Err(FairError::LpTooLarge { n, limit: MAX_LP_POINTS });
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(FairError::InvalidParams(format!("budget z = {z} must be finite and >= 0")));
    }
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(FairError::InvalidParams(format!("lambda = {lambda} must be positive")));
    }
    let radii = if lambda.is_finite() {
        delta_radii(inst, z)?
    } else {
        Vec::new()
    };
    let weights = inst.weights();

    let mut x_index = vec![vec![None; n]; n];
    let mut next = 0;
    for (u, row) in x_index.iter_mut().enumerate() {
        let bounded = !radii.is_empty() && weights.total(u) > 0.0;
        for (v, slot) in row.iter_mut().enumerate() {
            if bounded && beyond_radius(inst.dist(u, v), lambda * radii[u]) {
                continue;
            }
            *slot = Some(next);
            next += 1;
        }
    }
    let y_offset = next;
    let a_index = y_offset + n;
    let mut program = LinearProgram::new(a_index + 1);
    program.objective[a_index] = 1.0;

    let max_pow = inst.max_distance().powf(inst.p());
    let scale = (0..n)
        .map(|u| {
            weights
                .groups()
                .map(|g| g[u])
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        * max_pow;
    let scale = if scale > 0.0 { scale } else { 1.0 };

    // (1) every point is fully assigned
    for row in &x_index {
        let terms = row.iter().flatten().map(|&i| (i, 1.0)).collect();
        program.add(terms, Relation::Eq, 1.0);
    }
    // (2) at most k centers
    program.add((0..n).map(|v| (y_offset + v, 1.0)).collect(), Relation::Le, inst.k() as f64);
    // (3) x[u][v] <= y[v]
    for row in &x_index {
        for (v, idx) in row.iter().enumerate() {
            if let Some(i) = *idx {
                program.add(vec![(i, 1.0), (y_offset + v, -1.0)], Relation::Le, 0.0);
            }
        }
    }
    // epigraph rows: group cost / scale <= A'
    for g in weights.groups() {
        let mut terms = Vec::new();
        for (u, row) in x_index.iter().enumerate() {
            if g[u] == 0.0 {
                continue;
            }
            for (v, idx) in row.iter().enumerate() {
                let c = g[u] * inst.dist_pow(u, v) / scale;
                if let (Some(i), true) = (*idx, c != 0.0) {
                    terms.push((i, c));
                }
            }
        }
        if !terms.is_empty() {
            terms.push((a_index, -1.0));
            program.add(terms, Relation::Le, 0.0);
        }
    }
    // seeded upper bound on the objective
    program.add(vec![(a_index, 1.0)], Relation::Le, 1.0);

    Ok(ClusterLpModel {
        program,
        budget: z,
        lambda,
        radii,
        x_index,
        y_offset,
        a_index,
        scale,
    })
}

/// Solves `model` with the bundled dense simplex.
pub fn solve_lp(inst: &MetricInstance, model: &ClusterLpModel, tol: f64) -> Result<FractionalSolution> {
    let solver = DenseSimplex {
        tolerance: tol,
        ..Default::default()
    };
    solve_lp_with(inst, model, &solver)
}

/// Solves `model` with any [`LpSolver`] and maps the optimum back to a
/// [`FractionalSolution`].
///
/// Openings above 1 are clamped to 1; this keeps every row feasible since
/// `x[u][v] <= 1` and never increases the center count.
pub fn solve_lp_with(
    inst: &MetricInstance,
    model: &ClusterLpModel,
    solver: &dyn LpSolver,
) -> Result<FractionalSolution> {
    let sol = solver.solve(&model.program)?;
    let n = model.n();
    let clean = |v: f64| if v < 1e-12 { 0.0 } else { v };
    let x: Vec<Vec<f64>> = model
        .x_index
        .iter()
        .map(|row| {
            row.iter()
                .map(|idx| idx.map_or(0.0, |i| clean(sol.values[i])))
                .collect()
        })
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|v| clean(sol.values[model.y_offset + v]).min(1.0))
        .collect();
    let mut out = FractionalSolution { x, y, objective: 0.0 };
    out.objective = out.max_cost(inst, inst.weights());
    debug_assert!(out.objective <= (sol.values[model.a_index] + 1e-6) * model.scale);
    Ok(out)
}
