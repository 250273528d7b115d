//! Instance generators: random metrics, the integrality-gap family and the
//! set-cover reduction.

use itertools::Itertools;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FairError, Result};
use crate::instance::MetricInstance;
use crate::oracle::binomial;

/// Largest `k` for which the gap family's groups are enumerated.
pub const MAX_GAP_K: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// Points uniform in `[0, 10]^2`, Euclidean distances.
    EuclideanPlane,
    /// Complete graph with edge lengths uniform in `[1, 10]`, closed under
    /// shortest paths.
    MetricCompletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightDist {
    Unit,
    /// Uniform in `[0.5, 2]`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub k: usize,
    pub groups: usize,
    pub p: f64,
    pub geometry: Geometry,
    pub weights: WeightDist,
}

/// Random instance; each point joins each group independently with
/// probability 1/2, and empty groups are redrawn.
pub fn gen_random(seed: u64, spec: &RandomSpec) -> Result<MetricInstance> {
    if spec.n == 0 || spec.k == 0 || spec.k > spec.n || spec.groups == 0 {
        return Err(FairError::InvalidParams(format!(
            "need n >= k >= 1 and at least one group, got n={} k={} groups={}",
            spec.n, spec.k, spec.groups
        )));
    }
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = match spec.geometry {
        Geometry::EuclideanPlane => {
            let pts: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
                .collect();
            (0..n)
                .map(|u| {
                    (0..n)
                        .map(|v| {
                            if u == v {
                                0.0
                            } else {
                                (pts[u].0 - pts[v].0).hypot(pts[u].1 - pts[v].1)
                            }
                        })
                        .collect()
                })
                .collect()
        }
        Geometry::MetricCompletion => {
            let mut d = vec![vec![0.0; n]; n];
            for u in 0..n {
                for v in u + 1..n {
                    let e = rng.gen_range(1.0..=10.0);
                    d[u][v] = e;
                    d[v][u] = e;
                }
            }
            for m in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        let via = d[u][m] + d[m][v];
                        if via < d[u][v] {
                            d[u][v] = via;
                        }
                    }
                }
            }
            d
        }
    };
    let mut groups = Vec::with_capacity(spec.groups);
    while groups.len() < spec.groups {
        let members: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        if !members.contains(&true) {
            continue;
        }
        let g = members
            .iter()
            .map(|&m| match (m, spec.weights) {
                (false, _) => 0.0,
                (true, WeightDist::Unit) => 1.0,
                (true, WeightDist::Uniform) => rng.gen_range(0.5..=2.0),
            })
            .collect();
        groups.push(g);
    }
    MetricInstance::new(dist, groups, spec.k, spec.p)
}

/// Integrality-gap family: `t = floor(sqrt k)`, `n = k + t` points at
/// pairwise distance 1, one unit-weight group per `t`-subset.
pub fn gen_gap_instance(k: usize, p: f64) -> Result<MetricInstance> {
    if k == 0 {
        return Err(FairError::InvalidParams("gap instance needs k >= 1".into()));
    }
    if k > MAX_GAP_K {
        return Err(FairError::GapTooLarge(k));
    }
    let t = gap_t(k);
    let n = k + t;
    debug_assert!(binomial(n, t) <= 100_000);
    let dist = (0..n)
        .map(|u| (0..n).map(|v| if u == v { 0.0 } else { 1.0 }).collect())
        .collect();
    let groups = (0..n)
        .combinations(t)
        .map(|subset| {
            let mut g = vec![0.0; n];
            for u in subset {
                g[u] = 1.0;
            }
            g
        })
        .collect();
    MetricInstance::new(dist, groups, k, p)
}

/// `floor(sqrt k)`.
pub fn gap_t(k: usize) -> usize {
    let mut t = 0;
    while (t + 1) * (t + 1) <= k {
        t += 1;
    }
    t
}

/// Clustering instance from a set system over `0..num_elements`: one point
/// per set plus a root (the last index), sets at distance 2 from each other
/// and 1 from the root. Group `j` holds the points of the sets containing
/// `j`, with unit weights.
pub fn gen_setcover_reduction(sets: &[Vec<usize>], num_elements: usize, k: usize, p: f64) -> Result<MetricInstance> {
    let m = sets.len();
    if m == 0 || num_elements == 0 {
        return Err(FairError::InvalidInstance("empty set system".into()));
    }
    let mut groups = vec![vec![0.0; m + 1]; num_elements];
    for (i, s) in sets.iter().enumerate() {
        for &e in s {
            if e >= num_elements {
                return Err(FairError::InvalidInstance(format!("element {e} outside 0..{num_elements}")));
            }
            groups[e][i] = 1.0;
        }
    }
    if let Some(e) = groups.iter().position(|g| g.iter().all(|&w| w == 0.0)) {
        return Err(FairError::InvalidInstance(format!("element {e} is in no set")));
    }
    let dist = (0..=m)
        .map(|u| {
            (0..=m)
                .map(|v| match (u == v, u == m || v == m) {
                    (true, _) => 0.0,
                    (false, true) => 1.0,
                    (false, false) => 2.0,
                })
                .collect()
        })
        .collect();
    MetricInstance::new(dist, groups, k, p)
}
