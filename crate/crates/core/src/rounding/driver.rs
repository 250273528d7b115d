use serde::{Deserialize, Serialize};

use super::forest::Forest;
use super::sample::{choose_s, open_support, randomized_round, trial_count, trial_rng, RoundingOutcome, RoundingPlan};
use crate::consolidation::{
    consolidate_centers, consolidate_locations, restrict_solution, ConsolidationResult, RestrictedSolution,
};
use crate::error::{FairError, Result};
use crate::instance::{AlgorithmParams, MetricInstance};
use crate::lp::{build_cluster_lp, solve_lp, FractionalSolution};

/// Forest, two-valued solution and closing plan; only built when `|P'| > k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingStage {
    pub forest: Forest,
    pub restricted: RestrictedSolution,
    pub plan: RoundingPlan,
}

/// Everything computed before sampling: the LP optimum, the consolidated
/// demands and the restricted solution on `P'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub budget: f64,
    pub params: AlgorithmParams,
    pub lp: FractionalSolution,
    pub consolidation: ConsolidationResult,
    /// `(x', y')` after center consolidation.
    pub restricted_lp: FractionalSolution,
    pub stage: Option<RoundingStage>,
}

impl Pipeline {
    /// Solves the strengthened LP for budget `z_g` and runs both
    /// consolidation steps.
    pub fn prepare(inst: &MetricInstance, params: &AlgorithmParams, z_g: f64) -> Result<Pipeline> {
        params.validate()?;
        let model = build_cluster_lp(inst, z_g, params.lambda)?;
        let lp = solve_lp(inst, &model, params.lp_tolerance)?;
        let consolidation = consolidate_locations(inst, &lp, params.gamma);
        let restricted_lp = consolidate_centers(inst, &consolidation, &lp);
        let stage = if consolidation.support.len() > inst.k() {
            let forest = Forest::build(inst, &consolidation.support)?;
            let restricted = restrict_solution(inst, &consolidation, &restricted_lp, params.gamma, &forest)?;
            let plan = choose_s(&forest, &restricted.y_prime, inst.k(), params.gamma);
            Some(RoundingStage {
                forest,
                restricted,
                plan,
            })
        } else {
            None
        };
        Ok(Pipeline {
            budget: z_g,
            params: *params,
            lp,
            consolidation,
            restricted_lp,
            stage,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.consolidation.support
    }

    /// `f(z) <= z`: the LP certifies nothing below the budget. Fails only
    /// when the budget is below the optimum.
    pub fn lp_within_budget(&self) -> bool {
        self.lp.objective <= self.budget * (1.0 + 1e-9) + self.params.lp_tolerance
    }

    /// One independent rounding with the trial's own random stream.
    pub fn round_once(&self, inst: &MetricInstance, seed: u64, trial: u64) -> Result<RoundingOutcome> {
        match &self.stage {
            None => open_support(inst, &self.consolidation),
            Some(stage) => randomized_round(
                inst,
                &self.consolidation,
                &stage.restricted,
                &stage.plan,
                &mut trial_rng(seed, trial),
            ),
        }
    }

    /// Runs `trials` roundings and keeps the best one with at most `k`
    /// centers: lowest cost under the consolidated demands, then fewer
    /// centers, then the lexicographically smaller set.
    pub fn round(&self, inst: &MetricInstance, trials: usize, seed: u64) -> Result<TrialSummary> {
        if self.stage.is_none() {
            let outcome = open_support(inst, &self.consolidation)?;
            return Ok(TrialSummary {
                outcome,
                trials: 0,
                feasible_trials: 0,
            });
        }
        let mut best: Option<RoundingOutcome> = None;
        let mut feasible = 0;
        for t in 0..trials {
            let out = self.round_once(inst, seed, t as u64)?;
            if !out.size_ok {
                continue;
            }
            feasible += 1;
            if best.as_ref().is_none_or(|b| better(&out, b)) {
                best = Some(out);
            }
        }
        match best {
            Some(outcome) => Ok(TrialSummary {
                outcome,
                trials,
                feasible_trials: feasible,
            }),
            None => Err(FairError::RoundingFailed {
                trials,
                fallback: Box::new(open_support(inst, &self.consolidation)?),
            }),
        }
    }
}

fn better(a: &RoundingOutcome, b: &RoundingOutcome) -> bool {
    a.cost_wprime
        .total_cmp(&b.cost_wprime)
        .then(a.centers.len().cmp(&b.centers.len()))
        .then_with(|| a.centers.cmp(&b.centers))
        .is_lt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub outcome: RoundingOutcome,
    /// Trials drawn; zero when `|P'| <= k` short-circuits.
    pub trials: usize,
    pub feasible_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxRun {
    pub pipeline: Pipeline,
    pub outcome: RoundingOutcome,
    pub trials: usize,
    pub feasible_trials: usize,
}

/// The randomized approximation for a fixed budget `z_g`: solve the LP,
/// consolidate, and round `ceil(log_{4/3}(1/epsilon))` times.
///
/// If no trial opens at most `k` centers the error carries the
/// bicriteria solution `C = P'` as a fallback.
pub fn run_main(inst: &MetricInstance, params: &AlgorithmParams, z_g: f64) -> Result<ApproxRun> {
    let pipeline = Pipeline::prepare(inst, params, z_g)?;
    let summary = pipeline.round(inst, trial_count(params.epsilon), params.seed)?;
    Ok(ApproxRun {
        pipeline,
        outcome: summary.outcome,
        trials: summary.trials,
        feasible_trials: summary.feasible_trials,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicriteriaRun {
    pub pipeline: Pipeline,
    pub outcome: RoundingOutcome,
    /// `floor(k / (1 - gamma))`.
    pub center_limit: usize,
}

pub fn bicriteria_limit(k: usize, gamma: f64) -> usize {
    (k as f64 / (1.0 - gamma) + 1e-9).floor() as usize
}

/// Deterministic bicriteria rounding: return the whole support `P'`.
pub fn bicriteria_round(inst: &MetricInstance, params: &AlgorithmParams, z_g: f64) -> Result<BicriteriaRun> {
    let pipeline = Pipeline::prepare(inst, params, z_g)?;
    let outcome = open_support(inst, &pipeline.consolidation)?;
    Ok(BicriteriaRun {
        center_limit: bicriteria_limit(inst.k(), params.gamma),
        pipeline,
        outcome,
    })
}
