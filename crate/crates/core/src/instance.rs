//! Problem instances and the quantities defined directly on them: the fair
//! cost of a center set, ball volumes and budget radii.

use serde::{Deserialize, Serialize};

use crate::error::{FairError, Result};

/// Absolute slack (scaled by the largest distance) allowed when validating
/// symmetry and the triangle inequality.
pub const METRIC_TOLERANCE: f64 = 1e-9;

/// Per-group nonnegative demands, `weights[j][u] = w_j(u)`. A zero entry
/// means `u` is not a member of group `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demands(Vec<Vec<f64>>);

impl Demands {
    pub fn new(groups: Vec<Vec<f64>>) -> Self {
        Demands(groups)
    }

    /// All-zero demands with the given shape.
    pub fn zeros(num_groups: usize, n: usize) -> Self {
        Demands(vec![vec![0.0; n]; num_groups])
    }

    pub fn num_groups(&self) -> usize {
        self.0.len()
    }

    pub fn group(&self, j: usize) -> &[f64] {
        &self.0[j]
    }

    pub fn groups(&self) -> impl Iterator<Item = &[f64]> {
        self.0.iter().map(Vec::as_slice)
    }

    pub fn get(&self, j: usize, u: usize) -> f64 {
        self.0[j][u]
    }

    pub fn set(&mut self, j: usize, u: usize, value: f64) {
        self.0[j][u] = value;
    }

    /// `w(u) = sum_j w_j(u)`.
    pub fn total(&self, u: usize) -> f64 {
        self.0.iter().map(|g| g[u]).sum()
    }

    /// Sum of each group's demand.
    pub fn group_sums(&self) -> Vec<f64> {
        self.0.iter().map(|g| g.iter().sum()).collect()
    }

    /// Points with positive total demand, ascending.
    pub fn support(&self) -> Vec<usize> {
        let n = self.0.first().map_or(0, Vec::len);
        (0..n).filter(|&u| self.total(u) > 0.0).collect()
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.0
    }
}

/// A socially fair clustering instance: a finite metric, overlapping
/// weighted groups, the center budget `k` and the exponent `p`.
///
/// Immutable after construction; `d(u,v)^p` is cached.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricInstance {
    dist: Vec<Vec<f64>>,
    dist_pow: Vec<Vec<f64>>,
    weights: Demands,
    k: usize,
    p: f64,
}

impl MetricInstance {
    /// Validates and builds an instance from an explicit distance matrix.
    pub fn new(dist: Vec<Vec<f64>>, weights: Vec<Vec<f64>>, k: usize, p: f64) -> Result<Self> {
        validate(&dist, &weights, k, p)?;
        let dist_pow = power_matrix(&dist, p);
        Ok(MetricInstance {
            dist,
            dist_pow,
            weights: Demands(weights),
            k,
            p,
        })
    }

    /// Builds an instance from Euclidean coordinates.
    pub fn from_coords(coords: &[Vec<f64>], weights: Vec<Vec<f64>>, k: usize, p: f64) -> Result<Self> {
        if let Some(dim) = coords.first().map(Vec::len) {
            if coords.iter().any(|c| c.len() != dim) {
                return Err(FairError::InvalidInstance(
                    "coordinates have mixed dimensions".into(),
                ));
            }
        }
        let dist = coords
            .iter()
            .map(|a| {
                coords
                    .iter()
                    .map(|b| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        Self::new(dist, weights, k, p)
    }

    /// Same metric and groups with a different center budget.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.dist.clone(), self.weights.0.clone(), k, self.p)
    }

    /// Same metric and groups with a different exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.dist.clone(), self.weights.0.clone(), self.k, p)
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn num_groups(&self) -> usize {
        self.weights.num_groups()
    }

    pub fn weights(&self) -> &Demands {
        &self.weights
    }

    pub fn dist(&self, u: usize, v: usize) -> f64 {
        self.dist[u][v]
    }

    /// `d(u,v)^p`.
    pub fn dist_pow(&self, u: usize, v: usize) -> f64 {
        self.dist_pow[u][v]
    }

    pub fn dist_matrix(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn max_distance(&self) -> f64 {
        self.dist
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }

    /// `d(u, C)`; infinite for an empty set.
    pub fn dist_to_set(&self, u: usize, centers: &CenterSet) -> f64 {
        centers
            .iter()
            .map(|c| self.dist[u][c])
            .fold(f64::INFINITY, f64::min)
    }
}

fn power_matrix(dist: &[Vec<f64>], p: f64) -> Vec<Vec<f64>> {
    dist.iter()
        .map(|row| {
            row.iter()
                .map(|&d| if p == 1.0 { d } else { d.powf(p) })
                .collect()
        })
        .collect()
}

fn validate(dist: &[Vec<f64>], weights: &[Vec<f64>], k: usize, p: f64) -> Result<()> {
    let bad = |msg: String| Err(FairError::InvalidInstance(msg));
    let n = dist.len();
    if n == 0 {
        return bad("instance has no points".into());
    }
    if !(p.is_finite() && p >= 1.0) {
        return bad(format!("exponent p = {p} must be a finite real >= 1"));
    }
    if k == 0 || k > n {
        return bad(format!("k = {k} must lie in 1..={n}"));
    }
    if weights.is_empty() {
        return bad("at least one group is required".into());
    }
    for (u, row) in dist.iter().enumerate() {
        if row.len() != n {
            return bad(format!("distance row {u} has length {} != {n}", row.len()));
        }
        if let Some(v) = row.iter().position(|d| !d.is_finite() || *d < 0.0) {
            return bad(format!("distance d({u},{v}) = {} is not a nonnegative real", row[v]));
        }
        if row[u] != 0.0 {
            return bad(format!("diagonal entry d({u},{u}) = {} is not zero", row[u]));
        }
    }
    let tol = METRIC_TOLERANCE * dist.iter().flatten().fold(1.0_f64, |m, &d| m.max(d));
    for u in 0..n {
        for v in (u + 1)..n {
            if (dist[u][v] - dist[v][u]).abs() > tol {
                return bad(format!("distance matrix is not symmetric at ({u},{v})"));
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                if dist[u][w] > dist[u][v] + dist[v][w] + tol {
                    return bad(format!("triangle inequality fails for ({u},{v},{w})"));
                }
            }
        }
    }
    let mut any_positive = false;
    for (j, group) in weights.iter().enumerate() {
        if group.len() != n {
            return bad(format!("group {j} has {} weights, expected {n}", group.len()));
        }
        if let Some(u) = group.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return bad(format!("weight w_{j}({u}) = {} is not a nonnegative real", group[u]));
        }
        any_positive |= group.iter().any(|&w| w > 0.0);
    }
    if !any_positive {
        return bad("all weights are zero".into());
    }
    Ok(())
}

/// A set of chosen centers, kept sorted and duplicate-free so that the
/// derived ordering is the lexicographic one.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CenterSet(Vec<usize>);

impl CenterSet {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        CenterSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.0.binary_search(&u).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl FromIterator<usize> for CenterSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        CenterSet::new(iter)
    }
}

/// Tunables shared by the approximation and bicriteria pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    /// Restriction slack; supports have `y' >= 1 - gamma`. Must be in (0, 1/2).
    pub gamma: f64,
    /// Radius multiplier of the strengthened LP; at least 2.
    pub lambda: f64,
    /// Target failure probability of the repeated rounding.
    pub epsilon: f64,
    pub seed: u64,
    pub lp_tolerance: f64,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        AlgorithmParams {
            gamma: 0.1,
            lambda: 2.0,
            epsilon: 0.01,
            seed: 0,
            lp_tolerance: 1e-7,
        }
    }
}

impl AlgorithmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FairError::InvalidParams(msg));
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return bad(format!("gamma = {} must lie in (0, 1/2)", self.gamma));
        }
        if !(self.lambda >= 2.0) {
            return bad(format!("lambda = {} must be at least 2", self.lambda));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon = {} must lie in (0, 1)", self.epsilon));
        }
        if !(self.lp_tolerance > 0.0 && self.lp_tolerance < 1e-2) {
            return bad(format!("lp_tolerance = {} out of range", self.lp_tolerance));
        }
        Ok(())
    }
}

/// Per-group costs `sum_u w_j(u) d(u,C)^p`.
pub fn group_costs(inst: &MetricInstance, centers: &CenterSet, weights: &Demands) -> Result<Vec<f64>> {
    if centers.is_empty() {
        return Err(FairError::NoCenters);
    }
    let reach: Vec<f64> = (0..inst.n())
        .map(|u| {
            centers
                .iter()
                .map(|c| inst.dist_pow(u, c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(weights
        .groups()
        .map(|g| g.iter().zip(&reach).map(|(w, r)| w * r).sum())
        .collect())
}

/// The fair cost `max_j sum_u w_j(u) d(u,C)^p` of `centers` under `weights`.
pub fn fair_cost(inst: &MetricInstance, centers: &CenterSet, weights: &Demands) -> Result<f64> {
    Ok(group_costs(inst, centers, weights)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// `vol_v(r) = max_j sum_{u in B(v,r)} w_j(u) r^p` over the closed ball.
pub fn ball_volume(inst: &MetricInstance, v: usize, r: f64) -> f64 {
    ball_mass(inst, v, |d| d <= r) * r.powf(inst.p())
}

/// The left limit `vol_v(r - 0)`, i.e. the volume with the open ball.
pub fn ball_volume_left(inst: &MetricInstance, v: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    ball_mass(inst, v, |d| d < r) * r.powf(inst.p())
}

fn ball_mass(inst: &MetricInstance, v: usize, inside: impl Fn(f64) -> bool) -> f64 {
    inst.weights()
        .groups()
        .map(|g| {
            (0..inst.n())
                .filter(|&u| inside(inst.dist(v, u)))
                .map(|u| g[u])
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `Delta_z(v)` together with the volume just below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRadius {
    pub radius: f64,
    /// `vol_v(radius - 0)`; never exceeds the budget.
    pub left_volume: f64,
}

/// The smallest radius `r` with `vol_v(r) >= z`.
///
/// Between consecutive distinct distances from `v` the group totals are
/// constant, so the volume is `W r^p` there and the minimizer is either the
/// interval's left endpoint or the analytic root `(z/W)^(1/p)`.
pub fn delta_radius(inst: &MetricInstance, v: usize, z: f64) -> Result<DeltaRadius> {
    if z <= 0.0 {
        return Ok(DeltaRadius {
            radius: 0.0,
            left_volume: 0.0,
        });
    }
    let p = inst.p();
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by(|&a, &b| inst.dist(v, a).total_cmp(&inst.dist(v, b)));

    let mut totals = vec![0.0; inst.num_groups()];
    let mut prev_mass = 0.0;
    let mut idx = 0;
    while idx < order.len() {
        let level = inst.dist(v, order[idx]);
        while idx < order.len() && inst.dist(v, order[idx]) == level {
            for (j, t) in totals.iter_mut().enumerate() {
                *t += inst.weights().get(j, order[idx]);
            }
            idx += 1;
        }
        let mass = totals.iter().copied().fold(0.0, f64::max);
        let next = order.get(idx).map_or(f64::INFINITY, |&u| inst.dist(v, u));

        if mass * level.powf(p) >= z {
            // The volume jumps across z exactly at this level.
            return Ok(DeltaRadius {
                radius: level,
                left_volume: prev_mass * level.powf(p),
            });
        }
        if mass > 0.0 {
            let root = (z / mass).powf(1.0 / p);
            if root < next {
                return Ok(DeltaRadius {
                    radius: root,
                    left_volume: mass * root.powf(p),
                });
            }
        }
        prev_mass = mass;
    }
    Err(FairError::BudgetUnreachable { point: v, budget: z })
}

/// `Delta_z(v)` for every point.
pub fn delta_radii(inst: &MetricInstance, z: f64) -> Result<Vec<f64>> {
    (0..inst.n())
        .map(|v| delta_radius(inst, v, z).map(|d| d.radius))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(points: &[f64], weights: Vec<Vec<f64>>, k: usize, p: f64) -> MetricInstance {
        let coords: Vec<Vec<f64>> = points.iter().map(|&x| vec![x]).collect();
        MetricInstance::from_coords(&coords, weights, k, p).unwrap()
    }

    #[test]
    fn fair_cost_single_unit_point() {
        let inst = line(&[0.0, 1.0], vec![vec![1.0, 1.0]], 1, 2.0);
        let c = CenterSet::new([0]);
        assert_eq!(fair_cost(&inst, &c, inst.weights()).unwrap(), 1.0);
    }

    #[test]
    fn fair_cost_all_centers_is_zero() {
        let inst = line(&[0.0, 1.0, 5.0], vec![vec![1.0, 2.0, 3.0], vec![0.5, 0.0, 1.0]], 3, 1.0);
        let c = CenterSet::new(0..3);
        assert_eq!(fair_cost(&inst, &c, inst.weights()).unwrap(), 0.0);
    }

    #[test]
    fn fair_cost_rejects_empty_set() {
        let inst = line(&[0.0, 1.0], vec![vec![1.0, 1.0]], 1, 1.0);
        assert!(matches!(
            fair_cost(&inst, &CenterSet::default(), inst.weights()),
            Err(FairError::NoCenters)
        ));
    }

    #[test]
    fn fair_cost_takes_max_over_groups() {
        let inst = line(&[0.0, 1.0, 3.0], vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 1, 1.0);
        let c = CenterSet::new([0]);
        assert_eq!(group_costs(&inst, &c, inst.weights()).unwrap(), vec![1.0, 3.0]);
        assert_eq!(fair_cost(&inst, &c, inst.weights()).unwrap(), 3.0);
    }

    #[test]
    fn ball_volume_examples() {
        let inst = line(&[0.0, 10.0], vec![vec![3.0, 1.0]], 1, 1.0);
        assert_eq!(ball_volume(&inst, 0, 0.0), 0.0);
        assert_eq!(ball_volume(&inst, 0, 2.0), 6.0);
        // closed ball includes the point at distance exactly 10
        assert_eq!(ball_volume(&inst, 0, 10.0), 40.0);
        assert_eq!(ball_volume_left(&inst, 0, 10.0), 30.0);
    }

    #[test]
    fn delta_radius_examples() {
        let inst = line(&[0.0], vec![vec![1.0]], 1, 1.0);
        assert_eq!(delta_radius(&inst, 0, 0.0).unwrap().radius, 0.0);
        assert_eq!(delta_radius(&inst, 0, 5.0).unwrap().radius, 5.0);
    }

    #[test]
    fn delta_radius_lands_on_jump() {
        // vol_0(r) = r on [0,1), 3r from 1 on: z = 2 is first reached at r = 1.
        let inst = line(&[0.0, 1.0], vec![vec![1.0, 2.0]], 1, 1.0);
        let d = delta_radius(&inst, 0, 2.0).unwrap();
        assert_eq!(d.radius, 1.0);
        assert_eq!(d.left_volume, 1.0);
    }

    #[test]
    fn delta_radius_beyond_farthest_point() {
        // vol_0(2) = 2 * 2 = 4 < 10, the root lies on the unbounded last interval.
        let inst = line(&[0.0, 2.0], vec![vec![1.0, 1.0]], 1, 1.0);
        assert_eq!(delta_radius(&inst, 0, 10.0).unwrap().radius, 5.0);
    }

    #[test]
    fn validation_rejects_bad_input() {
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(MetricInstance::new(d.clone(), vec![vec![0.0, 0.0]], 1, 1.0).is_err());
        assert!(MetricInstance::new(d.clone(), vec![vec![1.0, 1.0]], 3, 1.0).is_err());
        assert!(MetricInstance::new(d.clone(), vec![vec![1.0, 1.0]], 1, 0.5).is_err());
        assert!(MetricInstance::new(d.clone(), vec![], 1, 1.0).is_err());
        assert!(MetricInstance::new(d, vec![vec![-1.0, 1.0]], 1, 1.0).is_err());
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(MetricInstance::new(asym, vec![vec![1.0, 1.0]], 1, 1.0).is_err());
        let tri = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(MetricInstance::new(tri, vec![vec![1.0; 3]], 1, 1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(AlgorithmParams::default().validate().is_ok());
        let p = AlgorithmParams { gamma: 0.5, ..Default::default() };
        assert!(p.validate().is_err());
        let p = AlgorithmParams { lambda: 1.5, ..Default::default() };
        assert!(p.validate().is_err());
    }

    fn arb_instance() -> impl Strategy<Value = MetricInstance> {
        (2usize..7, 1usize..4, 1.0f64..3.0).prop_flat_map(|(n, ell, p)| {
            (
                proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 2), n),
                proptest::collection::vec(proptest::collection::vec(0.0f64..2.0, n), ell),
                Just(p),
            )
                .prop_map(|(coords, mut w, p)| {
                    w[0][0] += 0.5;
                    MetricInstance::from_coords(&coords, w, 1, p).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn approximate_triangle_inequality(inst in arb_instance()) {
            let a = 2f64.powf(inst.p() - 1.0);
            for u in 0..inst.n() {
                for v in 0..inst.n() {
                    for w in 0..inst.n() {
                        let lhs = inst.dist_pow(u, w);
                        let rhs = a * (inst.dist_pow(u, v) + inst.dist_pow(v, w));
                        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
                    }
                }
            }
        }

        #[test]
        fn ball_volume_monotone(inst in arb_instance(), r1 in 0.0f64..10.0, dr in 0.0f64..5.0) {
            for v in 0..inst.n() {
                prop_assert!(ball_volume(&inst, v, r1) <= ball_volume(&inst, v, r1 + dr));
            }
        }

        #[test]
        fn delta_radius_sandwich(inst in arb_instance(), z in 0.0f64..50.0) {
            for v in 0..inst.n() {
                let d = delta_radius(&inst, v, z).unwrap();
                if d.radius > 0.0 {
                    prop_assert!(ball_volume_left(&inst, v, d.radius) <= z * (1.0 + 1e-9));
                    prop_assert!(ball_volume(&inst, v, d.radius) >= z * (1.0 - 1e-9));
                }
            }
        }

        #[test]
        fn fair_cost_zero_iff_weighted_points_covered(inst in arb_instance(), mask in 1u32..64) {
            let centers: CenterSet = (0..inst.n()).filter(|u| mask >> u & 1 == 1).collect();
            prop_assume!(!centers.is_empty());
            let cost = fair_cost(&inst, &centers, inst.weights()).unwrap();
            let covered = (0..inst.n())
                .filter(|&u| inst.weights().total(u) > 0.0)
                .all(|u| inst.dist_to_set(u, &centers) == 0.0);
            prop_assert_eq!(cost == 0.0, covered);
        }
    }
}
