use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{FairError, Result};
use crate::instance::MetricInstance;

/// Nearest-neighbor forest on the support.
///
/// All pairs of support points are scanned by ascending distance (ties by
/// the pair's indices); the first pair a point appears in names its partner
/// `u'`, and every `{u, u'}` becomes an edge. Trees are rooted at their
/// lowest-index vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    vertices: Vec<usize>,
    partner: Vec<Option<usize>>,
    edges: Vec<(usize, usize)>,
    roots: Vec<usize>,
    depth: Vec<Option<usize>>,
}

impl Forest {
    pub fn build(inst: &MetricInstance, support: &[usize]) -> Result<Forest> {
        let mut vertices = support.to_vec();
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.len() < 2 {
            return Err(FairError::ForestUndefined(vertices.len()));
        }
        let n = inst.n();

        let mut pairs = Vec::with_capacity(vertices.len() * (vertices.len() - 1) / 2);
        for (i, &a) in vertices.iter().enumerate() {
            for &b in &vertices[i + 1..] {
                pairs.push((a, b));
            }
        }
        pairs.sort_by(|&(a, b), &(c, d)| {
            inst.dist(a, b)
                .total_cmp(&inst.dist(c, d))
                .then((a, b).cmp(&(c, d)))
        });

        let mut partner = vec![None; n];
        let mut remaining = vertices.len();
        for &(a, b) in &pairs {
            for (u, v) in [(a, b), (b, a)] {
                if partner[u].is_none() {
                    partner[u] = Some(v);
                    remaining -= 1;
                }
            }
            if remaining == 0 {
                break;
            }
        }

        let mut edges: Vec<(usize, usize)> = vertices
            .iter()
            .map(|&u| {
                let v = partner[u].expect("every vertex has a partner");
                (u.min(v), u.max(v))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();

        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut depth = vec![None; n];
        let mut roots = Vec::new();
        for &r in &vertices {
            if depth[r].is_some() {
                continue;
            }
            roots.push(r);
            depth[r] = Some(0);
            let mut queue = VecDeque::from([r]);
            while let Some(u) = queue.pop_front() {
                let du = depth[u].unwrap();
                for &v in &adjacency[u] {
                    if depth[v].is_none() {
                        depth[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }

        Ok(Forest {
            vertices,
            partner,
            edges,
            roots,
            depth,
        })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// The closest other support point chosen for `u`.
    pub fn partner(&self, u: usize) -> Option<usize> {
        self.partner.get(u).copied().flatten()
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn depth(&self, u: usize) -> Option<usize> {
        self.depth.get(u).copied().flatten()
    }

    /// Union over all trees of the even-depth vertices.
    pub fn even_set(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .copied()
            .filter(|&u| self.depth(u).is_some_and(|d| d % 2 == 0))
            .collect()
    }
}
