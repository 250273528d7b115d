//! Exact enumeration oracles and budget guessing.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FairError, Result};
use crate::instance::{fair_cost, AlgorithmParams, CenterSet, MetricInstance};
use crate::lp::{build_basic_lp, solve_lp};
use crate::rounding::{bicriteria_limit, open_support, trial_count, Pipeline, RoundingOutcome};

/// Largest number of `k`-subsets [`brute_force_opt`] will enumerate.
pub const OPT_SUBSET_LIMIT: u128 = 10_000_000;
/// Largest number of `t`-subsets [`brute_force_multicover`] will enumerate.
pub const MULTICOVER_SUBSET_LIMIT: u128 = 1_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub centers: CenterSet,
    pub cost: f64,
}

/// Exact optimum over all `k`-subsets, ties broken by the lexicographically
/// smallest set.
pub fn brute_force_opt(inst: &MetricInstance) -> Result<OptResult> {
    let (n, k) = (inst.n(), inst.k());
    let count = binomial(n, k);
    if count > OPT_SUBSET_LIMIT {
        return Err(FairError::OracleBudgetExceeded {
            count,
            limit: OPT_SUBSET_LIMIT,
        });
    }
    let mut best: Option<OptResult> = None;
    for combo in (0..n).combinations(k) {
        let centers = CenterSet::new(combo);
        let cost = fair_cost(inst, &centers, inst.weights())?;
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(OptResult { centers, cost });
        }
    }
    Ok(best.expect("k >= 1 yields at least one subset"))
}

/// One representative per distance-zero class of weighted points, if at
/// most `k` classes exist. Such a set has fair cost zero.
pub fn zero_cost_solution(inst: &MetricInstance) -> Option<CenterSet> {
    let tol = 1e-12 * inst.max_distance().max(1.0);
    let mut reps: Vec<usize> = Vec::new();
    for u in (0..inst.n()).filter(|&u| inst.weights().total(u) > 0.0) {
        if !reps.iter().any(|&r| inst.dist(u, r) <= tol) {
            reps.push(u);
            if reps.len() > inst.k() {
                return None;
            }
        }
    }
    Some(CenterSet::new(reps))
}

/// Budgets `2^i w_j(u) d(u,v)^p` for `i` in `0..=floor(log2 n)`, ascending
/// and deduplicated within relative `1e-12`. Returns `[0]` when no
/// product is positive.
pub fn enumerate_budgets(inst: &MetricInstance) -> Vec<f64> {
    let n = inst.n();
    let levels = usize::BITS - 1 - n.leading_zeros();
    let mut base = Vec::new();
    for g in inst.weights().groups() {
        for u in (0..n).filter(|&u| g[u] > 0.0) {
            for v in 0..n {
                let b = g[u] * inst.dist_pow(u, v);
                if b > 0.0 {
                    base.push(b);
                }
            }
        }
    }
    if base.is_empty() {
        return vec![0.0];
    }
    let mut out: Vec<f64> = base
        .iter()
        .flat_map(|&b| (0..=levels).map(move |i| b * 2f64.powi(i as i32)))
        .collect();
    out.sort_by(f64::total_cmp);
    dedup_relative(&mut out, 1e-12);
    out
}

fn dedup_relative(values: &mut Vec<f64>, rel: f64) {
    let mut kept: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values.iter() {
        match kept.last() {
            Some(&last) if v - last <= rel * v.abs().max(last.abs()) => {}
            _ => kept.push(v),
        }
    }
    *values = kept;
}

/// Greedy `k` centers, each step adding the point that lowers the fair
/// cost most. Gives an upper bound on the optimum.
pub fn greedy_upper_bound(inst: &MetricInstance) -> Result<OptResult> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut cost = f64::INFINITY;
    for _ in 0..inst.k() {
        let mut step: Option<(f64, usize)> = None;
        for c in (0..inst.n()).filter(|c| !chosen.contains(c)) {
            let mut trial = chosen.clone();
            trial.push(c);
            let f = fair_cost(inst, &CenterSet::new(trial), inst.weights())?;
            if step.is_none_or(|(b, _)| f < b) {
                step = Some((f, c));
            }
        }
        let (f, c) = step.expect("k <= n");
        chosen.push(c);
        cost = f;
    }
    Ok(OptResult {
        centers: CenterSet::new(chosen),
        cost,
    })
}

/// Candidate budgets worth trying: the enumerated list without values
/// below the basic LP bound (those are below the optimum) or above twice a
/// greedy upper bound (a candidate in `[z*, 2 z*]` is never above it).
pub fn guess_candidates(inst: &MetricInstance, params: &AlgorithmParams) -> Result<Vec<f64>> {
    let all = enumerate_budgets(inst);
    let upper = 2.0 * greedy_upper_bound(inst)?.cost;
    let lower = solve_lp(inst, &build_basic_lp(inst)?, params.lp_tolerance)?.objective;
    let lower = lower - 1e-7 * lower.abs().max(1.0);
    Ok(all
        .into_iter()
        .filter(|&z| z >= lower && z <= upper * (1.0 + 1e-12))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessedRun {
    pub outcome: RoundingOutcome,
    /// Budget of the winning run; `None` when a zero-cost solution was
    /// returned directly.
    pub budget: Option<f64>,
    pub pipeline: Option<Pipeline>,
    pub trials: usize,
    pub feasible_trials: usize,
    pub candidates: Vec<f64>,
    /// Candidates whose LP optimum exceeded the budget.
    pub skipped: usize,
    /// Candidates that ran to completion.
    pub completed: usize,
}

struct Attempt {
    budget: f64,
    pipeline: Pipeline,
    outcome: RoundingOutcome,
    trials: usize,
    feasible_trials: usize,
}

enum Verdict {
    Done(Box<Attempt>),
    Skipped,
    Failed(FairError),
}

fn better(a: &RoundingOutcome, b: &RoundingOutcome) -> bool {
    a.cost_w
        .total_cmp(&b.cost_w)
        .then(a.centers.len().cmp(&b.centers.len()))
        .then_with(|| a.centers.cmp(&b.centers))
        .is_lt()
}

fn zero_cost_run(inst: &MetricInstance, centers: CenterSet) -> GuessedRun {
    let n = centers.len();
    GuessedRun {
        outcome: RoundingOutcome {
            size_ok: n <= inst.k(),
            group_costs_wprime: vec![0.0; inst.num_groups()],
            centers,
            cost_wprime: 0.0,
            cost_w: 0.0,
        },
        budget: None,
        pipeline: None,
        trials: 0,
        feasible_trials: 0,
        candidates: vec![0.0],
        skipped: 0,
        completed: 0,
    }
}

fn guess<F>(inst: &MetricInstance, params: &AlgorithmParams, attempt: F) -> Result<GuessedRun>
where
    F: Fn(Pipeline) -> Result<(RoundingOutcome, usize, usize)> + Sync,
{
    params.validate()?;
    if let Some(c) = zero_cost_solution(inst) {
        return Ok(zero_cost_run(inst, c));
    }
    let candidates = guess_candidates(inst, params)?;
    let verdicts: Vec<Verdict> = candidates
        .par_iter()
        .map(|&z| {
            let pipeline = match Pipeline::prepare(inst, params, z) {
                Ok(p) => p,
                Err(e) => return Verdict::Failed(e),
            };
            if !pipeline.lp_within_budget() {
                return Verdict::Skipped;
            }
            match attempt(pipeline.clone()) {
                Ok((outcome, trials, feasible_trials)) => Verdict::Done(Box::new(Attempt {
                    budget: z,
                    pipeline,
                    outcome,
                    trials,
                    feasible_trials,
                })),
                Err(e) => Verdict::Failed(e),
            }
        })
        .collect();

    let mut best: Option<Box<Attempt>> = None;
    let mut first_error: Option<FairError> = None;
    let (mut skipped, mut completed) = (0, 0);
    for v in verdicts {
        match v {
            Verdict::Done(a) => {
                completed += 1;
                if best.as_ref().is_none_or(|b| better(&a.outcome, &b.outcome)) {
                    best = Some(a);
                }
            }
            Verdict::Skipped => skipped += 1,
            Verdict::Failed(e) => {
                let replace = match (&first_error, &e) {
                    (None, _) => true,
                    (
                        Some(FairError::RoundingFailed { fallback: old, .. }),
                        FairError::RoundingFailed { fallback: new, .. },
                    ) => better(new, old),
                    (Some(FairError::RoundingFailed { .. }), _) => false,
                    (Some(_), FairError::RoundingFailed { .. }) => true,
                    _ => false,
                };
                if replace {
                    first_error = Some(e);
                }
            }
        }
    }
    match best {
        Some(a) => Ok(GuessedRun {
            outcome: a.outcome,
            budget: Some(a.budget),
            pipeline: Some(a.pipeline),
            trials: a.trials,
            feasible_trials: a.feasible_trials,
            candidates,
            skipped,
            completed,
        }),
        None => Err(first_error.unwrap_or(FairError::Infeasible)),
    }
}

/// Runs the randomized pipeline for every candidate budget and returns the
/// outcome with the lowest cost under the original demands.
pub fn run_with_guessing(inst: &MetricInstance, params: &AlgorithmParams) -> Result<GuessedRun> {
    let trials = trial_count(params.epsilon);
    guess(inst, params, |pl| {
        let s = pl.round(inst, trials, params.seed)?;
        Ok((s.outcome, s.trials, s.feasible_trials))
    })
}

/// Bicriteria counterpart of [`run_with_guessing`]: every candidate opens
/// its whole support, which has at most `floor(k / (1 - gamma))` points.
pub fn bicriteria_with_guessing(inst: &MetricInstance, params: &AlgorithmParams) -> Result<GuessedRun> {
    let limit = bicriteria_limit(inst.k(), params.gamma);
    let mut run = guess(inst, params, |pl| {
        Ok((open_support(inst, &pl.consolidation)?, 0, 0))
    })?;
    run.outcome.size_ok = run.outcome.centers.len() <= limit;
    Ok(run)
}

/// Minimum over `t`-subsets of the sets of the largest number of chosen
/// sets containing a single element.
pub fn brute_force_multicover(sets: &[Vec<usize>], t: usize) -> Result<usize> {
    let m = sets.len();
    if t > m {
        return Err(FairError::InvalidParams(format!("cannot choose {t} of {m} sets")));
    }
    let count = binomial(m, t);
    if count > MULTICOVER_SUBSET_LIMIT {
        return Err(FairError::OracleBudgetExceeded {
            count,
            limit: MULTICOVER_SUBSET_LIMIT,
        });
    }
    let universe = sets.iter().flatten().copied().max().map_or(0, |e| e + 1);
    let mut best = usize::MAX;
    let mut cover = vec![0usize; universe];
    for combo in (0..m).combinations(t) {
        cover.iter_mut().for_each(|c| *c = 0);
        for &i in &combo {
            let mut s = sets[i].clone();
            s.sort_unstable();
            s.dedup();
            for e in s {
                cover[e] += 1;
            }
        }
        best = best.min(cover.iter().copied().max().unwrap_or(0));
    }
    Ok(best)
}
