use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::Forest;
use crate::consolidation::{ConsolidationResult, RestrictedSolution};
use crate::error::Result;
use crate::instance::{fair_cost, group_costs, CenterSet, MetricInstance};

/// Closing probabilities and the parity class they are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingPlan {
    /// `p_u = (1 - y'_u) / gamma`, indexed by point (zero off the support).
    pub p_close: Vec<f64>,
    /// Support points that may be closed.
    pub s: Vec<usize>,
    /// Whether `s` is the even-depth class.
    pub even_selected: bool,
}

impl RoundingPlan {
    pub fn mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&u| self.p_close[u]).sum()
    }

    /// `(|P'| - k) / (2 gamma)`, the mass the selected class must carry.
    pub fn required_mass(support_len: usize, k: usize, gamma: f64) -> f64 {
        (support_len as f64 - k as f64) / (2.0 * gamma)
    }
}

/// Picks the even-depth class when it carries at least
/// `(|P'| - k) / (2 gamma)` closing mass, the odd class otherwise.
pub fn choose_s(forest: &Forest, y_prime: &[f64], k: usize, gamma: f64) -> RoundingPlan {
    let mut p_close = vec![0.0; y_prime.len()];
    for &u in forest.vertices() {
        p_close[u] = ((1.0 - y_prime[u]) / gamma).clamp(0.0, 1.0);
    }
    let even = forest.even_set();
    let needed = RoundingPlan::required_mass(forest.vertices().len(), k, gamma);
    let even_mass: f64 = even.iter().map(|&u| p_close[u]).sum();
    let (s, even_selected) = if even_mass >= needed {
        (even, true)
    } else {
        let odd = forest
            .vertices()
            .iter()
            .copied()
            .filter(|u| even.binary_search(u).is_err())
            .collect();
        (odd, false)
    };
    RoundingPlan {
        p_close,
        s,
        even_selected,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingOutcome {
    pub centers: CenterSet,
    /// `|C| <= k`.
    pub size_ok: bool,
    /// Fair cost under the consolidated demands.
    pub cost_wprime: f64,
    /// Fair cost under the original demands.
    pub cost_w: f64,
    /// Realized per-group cost under the consolidated demands.
    pub group_costs_wprime: Vec<f64>,
}

impl RoundingOutcome {
    pub fn evaluate(inst: &MetricInstance, cons: &ConsolidationResult, centers: CenterSet) -> Result<Self> {
        let group_costs_wprime = group_costs(inst, &centers, &cons.demands)?;
        let cost_wprime = group_costs_wprime.iter().copied().fold(0.0, f64::max);
        let cost_w = fair_cost(inst, &centers, inst.weights())?;
        Ok(RoundingOutcome {
            size_ok: centers.len() <= inst.k(),
            centers,
            cost_wprime,
            cost_w,
            group_costs_wprime,
        })
    }
}

/// Opens every support point outside `S` and each point of `S`
/// independently with probability `1 - p_v`.
pub fn randomized_round<R: Rng + ?Sized>(
    inst: &MetricInstance,
    cons: &ConsolidationResult,
    restricted: &RestrictedSolution,
    plan: &RoundingPlan,
    rng: &mut R,
) -> Result<RoundingOutcome> {
    // S is one parity class, so no S vertex has its neighbor in S.
    debug_assert!(plan.s.iter().all(|&v| restricted.neighbor[v]
        .is_none_or(|u| plan.s.binary_search(&u).is_err())));
    let mut open = Vec::with_capacity(cons.support.len());
    let mut s = plan.s.iter().peekable();
    for &v in &cons.support {
        if s.peek() == Some(&&v) {
            s.next();
            // keep with probability 1 - p_v
            if rng.gen::<f64>() >= plan.p_close[v] {
                open.push(v);
            }
        } else {
            open.push(v);
        }
    }
    RoundingOutcome::evaluate(inst, cons, CenterSet::new(open))
}

/// Short-circuit used when `|P'| <= k`: open the whole support.
pub fn open_support(inst: &MetricInstance, cons: &ConsolidationResult) -> Result<RoundingOutcome> {
    RoundingOutcome::evaluate(inst, cons, CenterSet::new(cons.support.iter().copied()))
}

/// Independent, reproducible stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `ceil(log_{4/3}(1/epsilon))`.
pub fn trial_count(epsilon: f64) -> usize {
    ((1.0 / epsilon).ln() / (4.0f64 / 3.0).ln()).ceil().max(1.0) as usize
}
