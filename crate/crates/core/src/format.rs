//! JSON instance files.
//!
//! ```json
//! {"n": 3, "p": 1, "k": 1,
//!  "coords": [[0, 0], [1, 0], [0, 2]],
//!  "groups": [{"0": 1, "2": 0.5}, {"1": 2}]}
//! ```
//!
//! Either `coords` (Euclidean) or `dist` (full matrix) must be present.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FairError, Result};
use crate::instance::MetricInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<f64>>>,
    pub groups: Vec<BTreeMap<usize, f64>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &MetricInstance) -> Self {
        let groups = inst
            .weights()
            .groups()
            .map(|g| {
                g.iter()
                    .enumerate()
                    .filter(|(_, &w)| w != 0.0)
                    .map(|(u, &w)| (u, w))
                    .collect()
            })
            .collect();
        InstanceFile {
            n: inst.n(),
            p: inst.p(),
            k: inst.k(),
            coords: None,
            dist: Some(inst.dist_matrix().to_vec()),
            groups,
        }
    }

    pub fn to_instance(&self) -> Result<MetricInstance> {
        let n = self.n;
        let mut weights = Vec::with_capacity(self.groups.len());
        for (j, g) in self.groups.iter().enumerate() {
            let mut row = vec![0.0; n];
            for (&u, &w) in g {
                if u >= n {
                    return Err(FairError::InvalidInstance(format!("group {j} names point {u}, but n = {n}")));
                }
                row[u] = w;
            }
            weights.push(row);
        }
        match (&self.coords, &self.dist) {
            (Some(c), None) => {
                if c.len() != n {
                    return Err(FairError::InvalidInstance(format!("{} coordinates for n = {n}", c.len())));
                }
                MetricInstance::from_coords(c, weights, self.k, self.p)
            }
            (None, Some(d)) => {
                if d.len() != n {
                    return Err(FairError::InvalidInstance(format!("{} distance rows for n = {n}", d.len())));
                }
                MetricInstance::new(d.clone(), weights, self.k, self.p)
            }
            _ => Err(FairError::InvalidInstance("exactly one of coords and dist is required".into())),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<MetricInstance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| FairError::InvalidInstance(format!("malformed instance: {e}")))?;
    file.to_instance()
}

pub fn read_instance(path: &Path) -> Result<MetricInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FairError::InvalidInstance(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text)
}

pub fn instance_to_json(inst: &MetricInstance) -> String {
    serde_json::to_string(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_coords_with_sparse_groups() {
        let text = r#"{"n": 3, "p": 1, "k": 1, "coords": [[0, 0], [3, 0], [0, 4]],
                      "groups": [{"0": 1, "2": 0.5}, {"1": 2}]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.dist(1, 2), 5.0);
        assert_eq!(inst.weights().group(0), &[1.0, 0.0, 0.5]);
        assert_eq!(inst.weights().group(1), &[0.0, 2.0, 0.0]);
    }

    #[test]
    fn round_trips() {
        let dist = vec![vec![0.0, 1.5], vec![1.5, 0.0]];
        let inst = MetricInstance::new(dist, vec![vec![1.0, 0.25]], 1, 2.0).unwrap();
        assert_eq!(parse_instance(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_instance("{").is_err());
        assert!(parse_instance(r#"{"n": 1, "p": 1, "k": 1, "groups": [{"0": 1}]}"#).is_err());
        assert!(parse_instance(r#"{"n": 1, "p": 1, "k": 1, "dist": [[0]], "groups": [{"3": 1}]}"#).is_err());
    }
}
