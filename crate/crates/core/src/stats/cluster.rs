use serde::{Deserialize, Serialize};

use super::correlation::complete_cases;
use super::pearson;

/// One agglomeration step. Leaves are numbered `0..n`; the cluster created by
/// merge `i` is numbered `n + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureClusterTree {
    pub names: Vec<String>,
    pub merges: Vec<Merge>,
    pub cut_height: f64,
    /// Clusters at the cut, each sorted by leaf index, ordered by first member.
    pub clusters: Vec<Vec<String>>,
    /// One member per cluster, aligned with `clusters`.
    pub representatives: Vec<String>,
}

/// Pairwise-complete Pearson correlation matrix with unit diagonal.
/// Pairs that cannot be correlated get 0.
pub fn correlation_matrix(columns: &[&[Option<f64>]]) -> Vec<Vec<f64>> {
    let n = columns.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = 1.0;
        for j in i + 1..n {
            let (x, y, _) = complete_cases(columns[i], columns[j], &[]);
            let r = pearson(&x, &y).map_or(0.0, |c| c.r);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    m
}

/// Average-linkage clustering on distance 1 − |r|, cut at `cut_height`.
pub fn cluster_features(names: &[String], corr: &[Vec<f64>], cut_height: f64) -> FeatureClusterTree {
    let n = names.len();
    let dist = |a: usize, b: usize| 1.0 - corr[a][b].abs();

    // Active clusters as (node id, leaf members).
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best = (f64::INFINITY, 0, 1);
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let (ma, mb) = (&active[a].1, &active[b].1);
                let total: f64 = ma
                    .iter()
                    .flat_map(|&i| mb.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| dist(i, j))
                    .sum();
                let d = total / (ma.len() * mb.len()) as f64;
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        let (height, a, b) = best;
        let (id_b, members_b) = active.remove(b);
        let (id_a, members_a) = std::mem::take(&mut active[a]);
        let mut members = members_a;
        members.extend(members_b);
        members.sort_unstable();
        merges.push(Merge {
            left: id_a,
            right: id_b,
            height,
            size: members.len(),
        });
        active[a] = (n + merges.len() - 1, members);
    }

    // Replay the merges up to the cut.
    let mut groups: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    for m in merges.iter().filter(|m| m.height <= cut_height) {
        let mut members = groups[m.left].take().unwrap_or_default();
        members.extend(groups[m.right].take().unwrap_or_default());
        members.sort_unstable();
        groups.push(Some(members));
    }
    let mut clusters: Vec<Vec<usize>> = groups.into_iter().flatten().collect();
    clusters.sort_by_key(|c| c[0]);

    let representatives = clusters
        .iter()
        .map(|c| {
            let score = |i: usize| {
                if c.len() == 1 {
                    return 1.0;
                }
                c.iter().filter(|&&j| j != i).map(|&j| corr[i][j].abs()).sum::<f64>() / (c.len() - 1) as f64
            };
            let mut best = c[0];
            for &i in &c[1..] {
                if score(i) > score(best) {
                    best = i;
                }
            }
            names[best].clone()
        })
        .collect();

    FeatureClusterTree {
        names: names.to_vec(),
        merges,
        cut_height,
        clusters: clusters
            .into_iter()
            .map(|c| c.into_iter().map(|i| names[i].clone()).collect())
            .collect(),
        representatives,
    }
}
