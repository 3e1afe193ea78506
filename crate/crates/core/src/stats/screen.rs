use serde::{Deserialize, Serialize};

use super::AdjustedResultSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenOutcome {
    /// Features passing both thresholds, in result order.
    pub retained: Vec<String>,
    pub excluded: Vec<String>,
}

impl ScreenOutcome {
    pub fn n_input(&self) -> usize {
        self.retained.len() + self.excluded.len()
    }
}

/// Keeps the `x_name` of every result with |r| ≥ `r_min` and adjusted p < `q`.
pub fn screen_features(set: &AdjustedResultSet, r_min: f64, q: f64) -> ScreenOutcome {
    let mut out = ScreenOutcome {
        retained: Vec::new(),
        excluded: Vec::new(),
    };
    for (r, &p_adj) in set.results.iter().zip(&set.p_adjusted) {
        if r.r.abs() >= r_min && p_adj < q {
            out.retained.push(r.x_name.clone());
        } else {
            out.excluded.push(r.x_name.clone());
        }
    }
    out
}
