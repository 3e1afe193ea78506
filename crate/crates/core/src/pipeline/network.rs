use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cohort::lipid_subclass;
use crate::stats::{AdjustedResultSet, CorrelationResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundusNode {
    pub name: String,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipidNode {
    pub name: String,
    pub subclass: Option<String>,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub fundus: String,
    pub lipid: String,
    pub r: f64,
    pub p_adjusted: f64,
    /// −1 or +1.
    pub sign: i8,
}

/// Bipartite graph of significant fundus ↔ lipid links. Both node lists are
/// ordered by degree descending, then name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssociationNetwork {
    pub fundus_nodes: Vec<FundusNode>,
    pub lipid_nodes: Vec<LipidNode>,
    pub edges: Vec<Edge>,
}

impl AssociationNetwork {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Keeps fundus features with more than `min_degree` lipid partners at adjusted p < `q`.
pub fn build_network(set: &AdjustedResultSet, min_degree: usize, q: f64) -> AssociationNetwork {
    let significant: Vec<usize> = (0..set.len()).filter(|&i| set.p_adjusted[i] < q).collect();
    let mut degree: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in &significant {
        *degree.entry(set.results[i].x_name.as_str()).or_default() += 1;
    }
    let edges: Vec<Edge> = significant
        .iter()
        .filter(|&&i| degree[set.results[i].x_name.as_str()] > min_degree)
        .map(|&i| {
            let r = &set.results[i];
            Edge {
                fundus: r.x_name.clone(),
                lipid: r.y_name.clone(),
                r: r.r,
                p_adjusted: set.p_adjusted[i],
                sign: if r.r < 0.0 { -1 } else { 1 },
            }
        })
        .collect();

    let mut fundus_nodes: Vec<FundusNode> = degree
        .iter()
        .filter(|(_, &d)| d > min_degree)
        .map(|(n, &d)| FundusNode {
            name: n.to_string(),
            degree: d,
        })
        .collect();
    fundus_nodes.sort_by(|a, b| b.degree.cmp(&a.degree).then_with(|| a.name.cmp(&b.name)));

    let mut lipid_degree: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &edges {
        *lipid_degree.entry(e.lipid.as_str()).or_default() += 1;
    }
    let mut lipid_nodes: Vec<LipidNode> = lipid_degree
        .into_iter()
        .map(|(n, d)| LipidNode {
            name: n.to_string(),
            subclass: lipid_subclass(n).map(str::to_string),
            degree: d,
        })
        .collect();
    lipid_nodes.sort_by(|a, b| b.degree.cmp(&a.degree).then_with(|| a.name.cmp(&b.name)));

    AssociationNetwork {
        fundus_nodes,
        lipid_nodes,
        edges,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAssociation {
    pub result: CorrelationResult,
    pub p_adjusted: f64,
}

/// Significant results by |r| descending, then p, then (x, y) names; at most `k`.
pub fn top_associations(set: &AdjustedResultSet, k: usize) -> Vec<RankedAssociation> {
    let mut ranked: Vec<RankedAssociation> = set
        .significant_indices()
        .map(|i| RankedAssociation {
            result: set.results[i].clone(),
            p_adjusted: set.p_adjusted[i],
        })
        .collect();
    ranked.sort_by(|a, b| {
        let (a, b) = (&a.result, &b.result);
        b.r.abs()
            .total_cmp(&a.r.abs())
            .then(a.p.total_cmp(&b.p))
            .then_with(|| a.x_name.cmp(&b.x_name))
            .then_with(|| a.y_name.cmp(&b.y_name))
    });
    ranked.truncate(k);
    ranked
}
