//! A dense-tableau two-phase primal simplex for small linear programs.
//!
//! All variables are nonnegative and the objective is minimized. Entering
//! columns are chosen by Dantzig's rule; after a run of degenerate pivots
//! the solver switches to Bland's rule until the objective strictly
//! improves again, which rules out cycling.

use crate::error::{FairError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c^T x  s.t.  rows, x >= 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(LinearConstraint { terms, relation, rhs });
    }

    /// Largest violation of any row or sign constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| {
            let lhs: f64 = c.terms.iter().map(|&(j, a)| a * x[j]).sum();
            match c.relation {
                Relation::Le => (lhs - c.rhs).max(0.0),
                Relation::Ge => (c.rhs - lhs).max(0.0),
                Relation::Eq => (lhs - c.rhs).abs(),
            }
        });
        let signs = x.iter().map(|&v| (-v).max(0.0));
        rows.chain(signs).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Anything that can solve a [`LinearProgram`] to optimality.
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution>;
}

#[derive(Debug, Clone, Copy)]
pub struct DenseSimplex {
    /// Feasibility tolerance for phase one.
    pub tolerance: f64,
    /// Pivot limit; `None` derives one from the tableau size.
    pub max_iterations: Option<usize>,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        DenseSimplex {
            tolerance: 1e-7,
            max_iterations: None,
        }
    }
}

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const DROP_EPS: f64 = 1e-13;
const DEGENERATE_STREAK: usize = 32;
const HARRIS_DELTA: f64 = 1e-9;
// largest accepted constraint residual of a returned point, relative to the rhs scale
const RESIDUAL_LIMIT: f64 = 1e-6;

struct Tableau {
    rows: usize,
    cols: usize,
    // rows x (cols + 1); the last column holds the right-hand side
    a: Vec<f64>,
    // reduced costs, last entry is minus the objective value
    cost: Vec<f64>,
    basis: Vec<usize>,
    // columns that may never enter (artificials in phase two)
    barred: Vec<bool>,
    // rows proven redundant in phase one
    dead: Vec<bool>,
    iterations: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.a[i * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let piv = self.a[r * w + c];
        for j in 0..w {
            self.a[r * w + j] /= piv;
        }
        self.a[r * w + c] = 1.0;
        let (before, rest) = self.a.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let prow: &[f64] = prow;
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(prow) {
                    *x -= f * p;
                    if x.abs() < DROP_EPS {
                        *x = 0.0;
                    }
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (x, &p) in self.cost.iter_mut().zip(prow) {
                *x -= f * p;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    fn set_costs(&mut self, c: &[f64]) {
        let w = self.cols + 1;
        self.cost.iter_mut().for_each(|x| *x = 0.0);
        self.cost[..c.len()].copy_from_slice(c);
        for i in 0..self.rows {
            let cb = c.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 && !self.dead[i] {
                for j in 0..w {
                    self.cost[j] -= cb * self.a[i * w + j];
                }
            }
        }
    }

    fn objective(&self) -> f64 {
        -self.cost[self.cols]
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = (0..self.cols).filter(|&j| !self.barred[j] && self.cost[j] < -COST_EPS);
        if bland {
            candidates.min()
        } else {
            candidates.min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]))
        }
    }

    /// Exact minimum-ratio row, ties to the smaller basic index.
    fn leaving_exact(&self, c: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            if self.dead[i] {
                continue;
            }
            let a = self.at(i, c);
            if a > PIVOT_EPS {
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br);
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    /// Two-pass Harris test: among rows whose ratio is within a small
    /// relaxation of the minimum, take the largest pivot element.
    fn leaving_harris(&self, c: usize) -> Option<usize> {
        let live = || (0..self.rows).filter(|&i| !self.dead[i] && self.at(i, c) > PIVOT_EPS);
        let bound = live()
            .map(|i| (self.rhs(i).max(0.0) + HARRIS_DELTA) / self.at(i, c))
            .min_by(f64::total_cmp)?;
        live()
            .filter(|&i| self.rhs(i).max(0.0) / self.at(i, c) <= bound)
            .max_by(|&i, &j| {
                self.at(i, c)
                    .total_cmp(&self.at(j, c))
                    .then(self.basis[j].cmp(&self.basis[i]))
            })
    }

    fn optimize(&mut self, limit: usize) -> Result<()> {
        let mut bland = false;
        let mut streak = 0;
        let mut last = self.objective();
        loop {
            let Some(c) = self.entering(bland) else {
                return Ok(());
            };
            let leaving = if bland { self.leaving_exact(c) } else { self.leaving_harris(c) };
            let Some(r) = leaving else {
                return Err(FairError::Unbounded);
            };
            if self.iterations >= limit {
                return Err(FairError::SolverStalled(self.iterations));
            }
            self.pivot(r, c);
            let now = self.objective();
            if now < last - 1e-12 * (1.0 + last.abs()) {
                streak = 0;
                bland = false;
            } else {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            }
            last = now;
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution> {
        let n = lp.num_vars();
        let m = lp.constraints.len();

        let mut slack_count = 0;
        let mut art_count = 0;
        for c in &lp.constraints {
            let rel = normalized(c).0;
            match rel {
                Relation::Le => slack_count += 1,
                Relation::Ge => {
                    slack_count += 1;
                    art_count += 1;
                }
                Relation::Eq => art_count += 1,
            }
        }
        let cols = n + slack_count + art_count;
        let w = cols + 1;
        let mut t = Tableau {
            rows: m,
            cols,
            a: vec![0.0; m * w],
            cost: vec![0.0; w],
            basis: vec![0; m],
            barred: vec![false; cols],
            dead: vec![false; m],
            iterations: 0,
        };

        let mut next_slack = n;
        let mut next_art = n + slack_count;
        for (i, c) in lp.constraints.iter().enumerate() {
            let (rel, sign) = normalized(c);
            for &(j, coef) in &c.terms {
                if j >= n || !coef.is_finite() {
                    return Err(FairError::InvalidParams(format!(
                        "bad term ({j}, {coef}) in constraint {i}"
                    )));
                }
                t.a[i * w + j] += sign * coef;
            }
            t.a[i * w + cols] = sign * c.rhs;
            match rel {
                Relation::Le => {
                    t.a[i * w + next_slack] = 1.0;
                    t.basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    t.a[i * w + next_slack] = -1.0;
                    next_slack += 1;
                    t.a[i * w + next_art] = 1.0;
                    t.basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    t.a[i * w + next_art] = 1.0;
                    t.basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let limit = self
            .max_iterations
            .unwrap_or(10_000 + 50 * (m + cols));
        let first_art = n + slack_count;

        if art_count > 0 {
            let mut phase_one = vec![0.0; cols];
            phase_one[first_art..].iter_mut().for_each(|x| *x = 1.0);
            t.set_costs(&phase_one);
            t.optimize(limit)?;
            let scale = lp
                .constraints
                .iter()
                .map(|c| c.rhs.abs())
                .fold(1.0, f64::max);
            let infeasibility: f64 = (0..m)
                .filter(|&i| t.basis[i] >= first_art)
                .map(|i| t.rhs(i).abs())
                .sum();
            if infeasibility > self.tolerance * scale {
                return Err(FairError::Infeasible);
            }
            // Drive artificials out of the basis or mark their rows redundant.
            for i in 0..m {
                if t.basis[i] >= first_art {
                    let col = (0..first_art)
                        .filter(|&j| t.at(i, j).abs() > PIVOT_EPS)
                        .max_by(|&a, &b| t.at(i, a).abs().total_cmp(&t.at(i, b).abs()));
                    match col {
                        Some(j) => t.pivot(i, j),
                        None => t.dead[i] = true,
                    }
                }
            }
            t.barred[first_art..].iter_mut().for_each(|b| *b = true);
        }

        let mut costs = lp.objective.clone();
        costs.resize(cols, 0.0);
        t.set_costs(&costs);
        t.optimize(limit)?;
        let mut values = vec![0.0; n];
        for i in 0..m {
            if !t.dead[i] && t.basis[i] < n {
                values[t.basis[i]] = t.rhs(i).max(0.0);
            }
        }
        let scale = lp.constraints.iter().map(|c| c.rhs.abs()).fold(1.0, f64::max);
        let residual = lp.max_violation(&values);
        if residual > RESIDUAL_LIMIT * scale {
            return Err(FairError::NumericalFailure(residual));
        }
        let objective = lp.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
        Ok(LpSolution {
            values,
            objective,
            iterations: t.iterations,
        })
    }
}

fn normalized(c: &LinearConstraint) -> (Relation, f64) {
    if c.rhs < 0.0 {
        let flipped = match c.relation {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        };
        (flipped, -1.0)
    } else {
        (c.relation, 1.0)
    }
}
