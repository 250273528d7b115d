//! Numeric certificates for the guarantees of each pipeline stage.
//!
//! Every check is stated as `lhs <= rhs`; it passes when the slack
//! `rhs - lhs` is at least `-CHECK_TOLERANCE`. Aggregate checks report the
//! instance with the smallest slack.

use serde::{Deserialize, Serialize};

use crate::consolidation::{fractional_radii, lp_cost_under, separation_factor};
use crate::error::Result;
use crate::instance::MetricInstance;
use crate::lp::check_feasibility_with;
use crate::rounding::{bicriteria_limit, Forest, Pipeline, RoundingOutcome, RoundingPlan};

pub const CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl LemmaCheck {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        LemmaCheck {
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            pass: slack >= -CHECK_TOLERANCE,
        }
    }

    /// A check with nothing to verify.
    pub fn vacuous(name: &str) -> Self {
        Self::new(name, 0.0, 0.0)
    }

    /// Recomputes slack and verdict from `lhs` and `rhs`, ignoring the
    /// stored ones.
    pub fn revalidate(&self) -> bool {
        let fresh = Self::new(&self.name, self.lhs, self.rhs);
        fresh.pass == self.pass && (fresh.slack - self.slack).abs() <= 1e-12 * (1.0 + fresh.slack.abs())
    }
}

/// Keeps the pair with the smallest `rhs - lhs`.
struct Worst {
    name: &'static str,
    pair: Option<(f64, f64)>,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Worst { name, pair: None }
    }

    fn see(&mut self, lhs: f64, rhs: f64) {
        if self.pair.is_none_or(|(l, r)| rhs - lhs < r - l) {
            self.pair = Some((lhs, rhs));
        }
    }

    fn finish(self) -> LemmaCheck {
        match self.pair {
            Some((l, r)) => LemmaCheck::new(self.name, l, r),
            None => LemmaCheck::vacuous(self.name),
        }
    }
}

/// `2^(2p-1) / gamma`, the factor on the optimum in the cost bounds.
pub fn opt_factor(p: f64, gamma: f64) -> f64 {
    2f64.powf(2.0 * p - 1.0) / gamma
}

/// Cap on a closable point's consolidated demand times its distance to
/// its neighbor, `(2 (2 lambda)^p + (4 lambda)^p / gamma) z`.
pub fn cap_bound(p: f64, lambda: f64, gamma: f64, z: f64) -> f64 {
    (2.0 * (2.0 * lambda).powf(p) + (4.0 * lambda).powf(p) / gamma) * z
}

/// Checks that depend only on the prepared pipeline.
pub fn pipeline_checks(inst: &MetricInstance, pl: &Pipeline) -> Result<Vec<LemmaCheck>> {
    let n = inst.n();
    let p = inst.p();
    let gamma = pl.params.gamma;
    let cons = &pl.consolidation;
    let w = inst.weights();
    let w2 = &cons.demands;
    let mut out = Vec::new();

    let mut conservation = Worst::new("demand_conservation");
    for (a, b) in w.group_sums().iter().zip(w2.group_sums()) {
        conservation.see((a - b).abs(), 0.0);
    }
    out.push(conservation.finish());

    let radii = fractional_radii(inst, &pl.lp);
    let mut radius_cost = Worst::new("radius_cost");
    for g in w.groups() {
        let lhs: f64 = (0..n).map(|u| g[u] * radii[u].powf(p)).sum();
        radius_cost.see(lhs, pl.lp.objective);
    }
    out.push(radius_cost.finish());

    let factor = separation_factor(gamma, p);
    let mut separation = Worst::new("support_separation");
    for (i, &u) in cons.support.iter().enumerate() {
        for &v in &cons.support[i + 1..] {
            separation.see(factor * radii[u].max(radii[v]), inst.dist(u, v));
        }
    }
    out.push(separation.finish());

    let mut moved = Worst::new("move_distance");
    let mut idempotent = 0usize;
    for u in 0..n {
        let t = cons.move_map[u];
        moved.see(inst.dist(u, t), factor * radii[u]);
        if cons.move_map[t] != t {
            idempotent += 1;
        }
    }
    out.push(moved.finish());
    out.push(LemmaCheck::new("move_map_idempotent", idempotent as f64, 0.0));

    let cost_w = lp_cost_under(inst, &pl.lp, w);
    let cost_w2 = lp_cost_under(inst, &pl.lp, w2);
    let mut consolidated = Worst::new("consolidated_lp_cost");
    for (a, b) in cost_w2.per_group.iter().zip(&cost_w.per_group) {
        consolidated.see(*a, *b);
    }
    out.push(consolidated.finish());

    let mut ball = Worst::new("ball_mass");
    for &u in &cons.support {
        let r = radii[u] / gamma.powf(1.0 / p);
        let slack = 1e-12 * r.max(1.0);
        let mass: f64 = (0..n)
            .filter(|&v| inst.dist(u, v) <= r + slack)
            .map(|v| pl.lp.x[u][v])
            .sum();
        ball.see(1.0 - gamma, mass);
    }
    out.push(ball.finish());

    let xp = &pl.restricted_lp;
    let mut restricted = Worst::new("support_opening");
    let mut outside = Worst::new("off_support_opening");
    for u in 0..n {
        if cons.in_support(u) {
            restricted.see(1.0 - gamma, xp.y[u]);
        } else {
            outside.see(xp.y[u], 0.0);
        }
    }
    out.push(restricted.finish());
    out.push(outside.finish());

    let report = check_feasibility_with(inst, w2, xp, pl.budget, 2.0 * pl.params.lambda, CHECK_TOLERANCE)?;
    out.push(LemmaCheck::new("feasible_at_double_lambda", report.worst(), 0.0));

    let base = lp_cost_under(inst, &pl.lp, w2);
    let after = lp_cost_under(inst, xp, w2);
    let mut blowup = Worst::new("center_consolidation_cost");
    let scale = 2f64.powf(p);
    for (a, b) in after.per_group.iter().zip(&base.per_group) {
        blowup.see(*a, scale * b);
    }
    out.push(blowup.finish());

    out.push(cap_check(inst, pl)?);

    if let Some(stage) = &pl.stage {
        let rs = &stage.restricted;
        let two_valued = lp_cost_under(inst, &rs.x_dd, w2);
        let mut c52 = Worst::new("restriction_cost");
        for (a, b) in two_valued.per_group.iter().zip(&after.per_group) {
            c52.see(*a, *b);
        }
        out.push(c52.finish());

        let mut capacity = Worst::new("neighbor_capacity");
        for &v in &cons.support {
            if let Some(u) = rs.neighbor[v] {
                capacity.see(1.0 - rs.y_prime[v], rs.y_prime[u]);
            }
        }
        out.push(capacity.finish());

        let needed = RoundingPlan::required_mass(cons.support.len(), inst.k(), gamma);
        out.push(LemmaCheck::new("selected_mass", needed, stage.plan.mass(&stage.plan.s)));
    }
    Ok(out)
}

/// Per-point cap for support points that are not fully open, with the
/// neighbor taken from the forest on `P'` even when no rounding is needed.
fn cap_check(inst: &MetricInstance, pl: &Pipeline) -> Result<LemmaCheck> {
    let mut cap = Worst::new("closable_demand_cap");
    let support = &pl.consolidation.support;
    if support.len() < 2 {
        return Ok(cap.finish());
    }
    let forest = match &pl.stage {
        Some(stage) => stage.forest.clone(),
        None => Forest::build(inst, support)?,
    };
    let bound = cap_bound(inst.p(), pl.params.lambda, pl.params.gamma, pl.budget);
    let y = &pl.restricted_lp.y;
    for &v in support {
        if y[v] >= 1.0 {
            continue;
        }
        let u = forest.partner(v).expect("support vertex has a partner");
        for g in pl.consolidation.demands.groups() {
            cap.see(g[v] * inst.dist_pow(v, u), bound);
        }
    }
    Ok(cap.finish())
}

/// Checks on a rounded outcome. Bounds involving the optimum are only
/// produced when `opt` is known.
pub fn outcome_checks(
    inst: &MetricInstance,
    pl: &Pipeline,
    outcome: &RoundingOutcome,
    opt: Option<f64>,
) -> Vec<LemmaCheck> {
    let mut out = Vec::new();
    if let Some(stage) = &pl.stage {
        let mut cover = Worst::new("support_coverage");
        for &v in &pl.consolidation.support {
            let allowed = match stage.restricted.neighbor[v] {
                Some(u) if !outcome.centers.contains(v) => inst.dist(v, u),
                _ => 0.0,
            };
            cover.see(inst.dist_to_set(v, &outcome.centers), allowed);
        }
        out.push(cover.finish());
    }
    if let Some(z) = opt {
        let p = inst.p();
        let rhs = opt_factor(p, pl.params.gamma) * z + 2f64.powf(p - 1.0) * outcome.cost_wprime;
        out.push(LemmaCheck::new("transfer_bound", outcome.cost_w, rhs));
    }
    out
}

/// Size and cost checks for the bicriteria solution `C = P'`.
pub fn bicriteria_checks(
    inst: &MetricInstance,
    pl: &Pipeline,
    outcome: &RoundingOutcome,
    opt: Option<f64>,
) -> Vec<LemmaCheck> {
    let limit = bicriteria_limit(inst.k(), pl.params.gamma);
    let mut out = vec![LemmaCheck::new("bicriteria_size", outcome.centers.len() as f64, limit as f64)];
    if let Some(z) = opt {
        let rhs = opt_factor(inst.p(), pl.params.gamma) * z;
        out.push(LemmaCheck::new("bicriteria_cost", outcome.cost_w, rhs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_and_verdict() {
        let c = LemmaCheck::new("x", 1.0, 1.0 - 5e-7);
        assert!(c.pass);
        assert!(c.revalidate());
        let c = LemmaCheck::new("x", 1.0, 0.9);
        assert!(!c.pass);
        let mut forged = c.clone();
        forged.pass = true;
        assert!(!forged.revalidate());
    }

    #[test]
    fn factors() {
        assert_eq!(opt_factor(1.0, 0.1), 20.0);
        assert!((opt_factor(2.0, 0.5) - 16.0).abs() < 1e-12);
        assert!((cap_bound(1.0, 2.0, 0.1, 1.0) - 88.0).abs() < 1e-9);
    }
}
