use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CorrelationResult, StatsError};

/// Family over which the Benjamini–Hochberg adjustment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdrScope {
    /// All tests form one family.
    #[default]
    Global,
    /// Each x feature's tests form their own family.
    PerFeature,
}

impl FdrScope {
    pub fn parse(s: &str) -> Option<FdrScope> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "global" => Some(FdrScope::Global),
            "per_feature" => Some(FdrScope::PerFeature),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FdrScope::Global => "global",
            FdrScope::PerFeature => "per_feature",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhAdjustment {
    pub p_adjusted: Vec<f64>,
    pub significant: Vec<bool>,
}

/// Benjamini–Hochberg step-up adjustment, returned in input order.
///
/// Ties are ordered by input index so the result is deterministic.
pub fn bh_fdr(p: &[f64], q: f64) -> Result<BhAdjustment, StatsError> {
    if let Some(index) = p.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(StatsError::InvalidP { index });
    }
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));

    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (pos, &i) in order.iter().enumerate().rev() {
        // Among tied p-values the largest rank gives the smallest ratio.
        let mut rank = pos + 1;
        while rank < m && p[order[rank]] == p[i] {
            rank += 1;
        }
        running = running.min(m as f64 * p[i] / rank as f64);
        adjusted[i] = running;
    }
    let significant = adjusted.iter().map(|&a| a < q).collect();
    Ok(BhAdjustment {
        p_adjusted: adjusted,
        significant,
    })
}

/// Correlation results with their FDR adjustment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedResultSet {
    pub results: Vec<CorrelationResult>,
    pub p_adjusted: Vec<f64>,
    pub significant: Vec<bool>,
    pub q: f64,
    pub scope: FdrScope,
}

impl AdjustedResultSet {
    pub fn adjust(results: Vec<CorrelationResult>, q: f64, scope: FdrScope) -> Result<Self, StatsError> {
        let p: Vec<f64> = results.iter().map(|r| r.p).collect();
        let (p_adjusted, significant) = match scope {
            FdrScope::Global => {
                let bh = bh_fdr(&p, q)?;
                (bh.p_adjusted, bh.significant)
            }
            FdrScope::PerFeature => {
                let mut families: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
                for (i, r) in results.iter().enumerate() {
                    families.entry(r.x_name.as_str()).or_default().push(i);
                }
                let mut adj = vec![0.0; p.len()];
                let mut sig = vec![false; p.len()];
                for idx in families.values() {
                    let family: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
                    let bh = bh_fdr(&family, q).map_err(|e| match e {
                        StatsError::InvalidP { index } => StatsError::InvalidP { index: idx[index] },
                        other => other,
                    })?;
                    for (k, &i) in idx.iter().enumerate() {
                        adj[i] = bh.p_adjusted[k];
                        sig[i] = bh.significant[k];
                    }
                }
                (adj, sig)
            }
        };
        Ok(Self {
            results,
            p_adjusted,
            significant,
            q,
            scope,
        })
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    pub fn significant_count(&self) -> usize {
        self.significant.iter().filter(|&&s| s).count()
    }

    /// Indices of significant results, in result order.
    pub fn significant_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.significant.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_cases() {
        let a = bh_fdr(&[0.03], 0.05).unwrap();
        assert_eq!((a.p_adjusted, a.significant), (vec![0.03], vec![true]));
        let a = bh_fdr(&[0.01, 0.02, 0.03, 0.04], 0.05).unwrap();
        assert_eq!(a.p_adjusted, vec![0.04; 4]);
        let a = bh_fdr(&[0.005, 0.1, 0.8], 0.05).unwrap();
        let expect = [0.015, 0.15, 0.8];
        for (g, e) in a.p_adjusted.iter().zip(expect) {
            assert!((g - e).abs() < 1e-15, "{g} vs {e}");
        }
    }

    #[test]
    fn invalid_p_rejected() {
        assert_eq!(bh_fdr(&[0.1, 1.5], 0.05), Err(StatsError::InvalidP { index: 1 }));
        assert_eq!(bh_fdr(&[f64::NAN], 0.05), Err(StatsError::InvalidP { index: 0 }));
    }

    #[test]
    fn ties_get_equal_adjustment() {
        let a = bh_fdr(&[0.02, 0.02, 0.5], 0.05).unwrap();
        assert_eq!(a.p_adjusted[0], a.p_adjusted[1]);
        assert_eq!(a.p_adjusted[0], 0.03);
    }

    fn result(x: &str, p: f64) -> CorrelationResult {
        CorrelationResult {
            x_name: x.into(),
            y_name: "y".into(),
            covariate_names: vec![],
            r: 0.1,
            p,
            ci_lower: 0.0,
            ci_upper: 0.2,
            n_used: 10,
            df: 8,
        }
    }

    #[test]
    fn per_feature_families() {
        let rs = vec![
            result("a", 0.01),
            result("b", 0.04),
            result("a", 0.02),
            result("b", 0.5),
        ];
        let g = AdjustedResultSet::adjust(rs.clone(), 0.05, FdrScope::Global).unwrap();
        let f = AdjustedResultSet::adjust(rs, 0.05, FdrScope::PerFeature).unwrap();
        assert_eq!(f.p_adjusted, vec![0.02, 0.08, 0.02, 0.5]);
        assert_eq!(g.p_adjusted[0], 0.04);
        assert_eq!(FdrScope::parse("per-feature"), Some(FdrScope::PerFeature));
    }
}
