#![allow(dead_code)]

use fairclust::generators::{gen_random, Geometry, RandomSpec, WeightDist};
use fairclust::MetricInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small random instance number `i`: n in 4..=8, k in 1..=3, up to three
/// groups, p alternating between 1 and 2.
pub fn small_random(i: u64) -> MetricInstance {
    let n = 4 + (i % 5) as usize;
    let k = 1 + ((i / 5) % 3) as usize;
    let spec = RandomSpec {
        n,
        k: k.min(n),
        groups: 1 + ((i / 2) % 3) as usize,
        p: if i % 2 == 0 { 1.0 } else { 2.0 },
        geometry: if (i / 3) % 2 == 0 {
            Geometry::EuclideanPlane
        } else {
            Geometry::MetricCompletion
        },
        weights: if (i / 7) % 2 == 0 { WeightDist::Unit } else { WeightDist::Uniform },
    };
    gen_random(1000 + i, &spec).unwrap()
}

/// `k + 1` sites at pairwise distance in `[1, 1.3)`, one unit-weight
/// singleton group per site. The LP spreads `k` openings over all sites,
/// so the consolidated support has more than `k` points.
pub fn separated_sites(seed: u64, k: usize) -> MetricInstance {
    let n = k + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0; n]; n];
    for u in 0..n {
        for v in u + 1..n {
            let e = rng.gen_range(1.0..1.3);
            d[u][v] = e;
            d[v][u] = e;
        }
    }
    let weights = (0..n)
        .map(|j| (0..n).map(|u| if u == j { 1.0 } else { 0.0 }).collect())
        .collect();
    MetricInstance::new(d, weights, k, 1.0).unwrap()
}

/// Independent optimum: walk all bitmasks with exactly `k` bits and
/// evaluate the objective with plain loops. Returns the cost and the
/// lexicographically smallest optimal set.
pub fn reference_opt(inst: &MetricInstance) -> (f64, Vec<usize>) {
    let n = inst.n();
    assert!(n < 26);
    let mut best = f64::INFINITY;
    let mut best_sets: Vec<Vec<usize>> = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != inst.k() {
            continue;
        }
        let centers: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut worst = 0.0f64;
        for j in 0..inst.num_groups() {
            let mut total = 0.0;
            for u in 0..n {
                let w = inst.weights().get(j, u);
                if w == 0.0 {
                    continue;
                }
                let mut near = f64::INFINITY;
                for &c in &centers {
                    near = near.min(inst.dist(u, c));
                }
                total += w * near.powf(inst.p());
            }
            worst = worst.max(total);
        }
        if worst < best {
            best = worst;
            best_sets = vec![centers];
        } else if worst == best {
            best_sets.push(centers);
        }
    }
    best_sets.sort();
    (best, best_sets.swap_remove(0))
}

/// Independent multicover value: every bitmask of `t` sets, coverage
/// counted element by element.
pub fn reference_multicover(sets: &[Vec<usize>], t: usize) -> usize {
    let m = sets.len();
    let elements: Vec<usize> = {
        let mut e: Vec<usize> = sets.iter().flatten().copied().collect();
        e.sort();
        e.dedup();
        e
    };
    let mut best = usize::MAX;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != t {
            continue;
        }
        let mut worst = 0;
        for &e in &elements {
            let c = (0..m).filter(|&i| mask >> i & 1 == 1 && sets[i].contains(&e)).count();
            worst = worst.max(c);
        }
        best = best.min(worst);
    }
    best
}

/// Random set system over `0..elements`, every element in at least one set.
pub fn random_set_system(seed: u64, m: usize, elements: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|_| (0..elements).filter(|_| rng.gen_bool(0.4)).collect())
            .collect();
        if (0..elements).all(|e| sets.iter().any(|s| s.contains(&e))) {
            return sets;
        }
    }
}
