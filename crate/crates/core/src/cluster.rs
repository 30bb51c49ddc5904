//! Distance-correlation clustering of attributes.
//!
//! Each round takes the largest remaining correlation, seeds a cluster at its
//! column and pulls in every attribute whose correlation with the seed lies
//! within `alpha` of that maximum, where
//! `alpha = (max - min_nonzero) / k`. Captured rows and columns are then
//! zeroed and the round repeats until the matrix is empty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub preset_k: usize,
    pub clusters: Vec<Vec<usize>>,
}

impl ClusterSet {
    /// Realised cluster count.
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn attribute_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }
}

/// One extraction round, recorded for inspection and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub d_max: f64,
    pub alpha: f64,
    pub seed: usize,
    pub members: Vec<usize>,
}

/// Clusters the attributes of a symmetric correlation matrix whose diagonal
/// has already been zeroed.
pub fn dcc_cluster(matrix: &[Vec<f64>], k: usize) -> Result<ClusterSet> {
    dcc_trace(matrix, k).map(|(set, _)| set)
}

pub fn dcc_trace(matrix: &[Vec<f64>], k: usize) -> Result<(ClusterSet, Vec<Round>)> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::invalid("empty correlation matrix"));
    }
    if k == 0 {
        return Err(Error::invalid("preset cluster count must be at least 1"));
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != n) {
        return Err(Error::Dimension(format!("row of length {} in {n}x{n} matrix", row.len())));
    }
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    let mut taken = vec![false; n];
    let mut clusters = Vec::new();
    let mut rounds = Vec::new();

    loop {
        // global max, ties to lowest column then lowest row; min over nonzero
        let mut best: Option<(f64, usize)> = None;
        let mut min_nonzero = f64::INFINITY;
        for col in 0..n {
            for row in 0..n {
                let v = m[row][col];
                if v == 0.0 {
                    continue;
                }
                min_nonzero = min_nonzero.min(v);
                if best.map_or(true, |(b, _)| v > b) {
                    best = Some((v, col));
                }
            }
        }
        let Some((d_max, seed)) = best else { break };
        let alpha = (d_max - min_nonzero) / k as f64;
        let mut members = vec![seed];
        for i in 0..n {
            let v = m[i][seed];
            if i != seed && v != 0.0 && (v == d_max || (v > d_max - alpha && v <= d_max)) {
                members.push(i);
            }
        }
        for &i in &members {
            taken[i] = true;
            for j in 0..n {
                m[i][j] = 0.0;
                m[j][i] = 0.0;
            }
        }
        rounds.push(Round {
            d_max,
            alpha,
            seed,
            members: members.clone(),
        });
        clusters.push(members);
    }
    for (i, _) in taken.iter().enumerate().filter(|(_, &t)| !t) {
        clusters.push(vec![i]);
    }
    Ok((
        ClusterSet {
            preset_k: k,
            clusters,
        },
        rounds,
    ))
}

/// Mean attribute-to-goal correlation over a cluster.
pub fn average_dcorr(cluster: &[usize], goal_dcorr: &[f64]) -> Result<f64> {
    if cluster.is_empty() {
        return Err(Error::invalid("empty cluster"));
    }
    let mut sum = 0.0;
    for &a in cluster {
        sum += *goal_dcorr
            .get(a)
            .ok_or_else(|| Error::Dimension(format!("attribute {a} has no goal correlation")))?;
    }
    Ok(sum / cluster.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_attributes_form_one_cluster() {
        let m = vec![vec![0.0, 0.8], vec![0.8, 0.0]];
        for k in 1..6 {
            assert_eq!(dcc_cluster(&m, k).unwrap().clusters, vec![vec![0, 1]]);
        }
    }

    /// Hand trace, k = 2:
    /// round 1: max 0.9 at column 0 (row 1), min nonzero 0.1,
    ///          alpha = 0.4, members with dCorr to x0 in (0.5, 0.9]: {x1}
    /// round 2: only the x2-x3 block remains, max = min = 0.8, alpha = 0,
    ///          seed column 2, x3 joins at exactly d_max.
    #[test]
    fn two_blocks_hand_trace() {
        let m = vec![
            vec![0.0, 0.9, 0.1, 0.1],
            vec![0.9, 0.0, 0.1, 0.1],
            vec![0.1, 0.1, 0.0, 0.8],
            vec![0.1, 0.1, 0.8, 0.0],
        ];
        let (set, rounds) = dcc_trace(&m, 2).unwrap();
        assert_eq!(set.clusters, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(rounds[0].seed, 0);
        assert!((rounds[0].alpha - 0.4).abs() < 1e-15);
        assert_eq!(rounds[1].seed, 2);
        assert_eq!(rounds[1].alpha, 0.0);
    }

    #[test]
    fn uncorrelated_attributes_become_singletons() {
        let m = vec![
            vec![0.0, 0.5, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ];
        let set = dcc_cluster(&m, 3).unwrap();
        assert_eq!(set.clusters, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn empty_matrix_and_zero_k_fail() {
        assert!(dcc_cluster(&[], 2).is_err());
        assert!(dcc_cluster(&[vec![0.0]], 0).is_err());
    }

    #[test]
    fn averages() {
        let v = [0.2, 0.4, 0.9, 0.7];
        assert_eq!(average_dcorr(&[3], &v).unwrap(), 0.7);
        assert!((average_dcorr(&[0, 1], &v).unwrap() - 0.3).abs() < 1e-15);
        assert!(average_dcorr(&[], &v).is_err());
        let flat = [0.5; 4];
        assert_eq!(average_dcorr(&[0, 2], &flat).unwrap(), average_dcorr(&[1, 3], &flat).unwrap());
    }
}
