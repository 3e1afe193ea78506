//! Correlation inference: Pearson and partial correlation, Fisher-z intervals,
//! Benjamini–Hochberg adjustment, screening and feature clustering.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod cluster;
pub mod correlation;
pub mod fdr;
pub mod screen;

pub use cluster::{cluster_features, correlation_matrix, FeatureClusterTree, Merge};
pub use correlation::{
    complete_cases, fisher_ci, ols_residuals, p_value, partial_correlation, partial_correlation_missing, pearson,
    OrthoBasis,
};
pub use fdr::{bh_fdr, AdjustedResultSet, BhAdjustment, FdrScope};
pub use screen::{screen_features, ScreenOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("{0} is constant")]
    ConstantInput(String),
    #[error("{n} complete observations, need at least {required}")]
    InsufficientSamples { n: usize, required: usize },
    #[error("covariate matrix is rank deficient")]
    RankDeficient,
    #[error("p-value at index {index} is outside [0, 1]")]
    InvalidP { index: usize },
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("confidence level {0} must lie in (0, 1)")]
    InvalidLevel(f64),
}

/// One correlation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub x_name: String,
    pub y_name: String,
    pub covariate_names: Vec<String>,
    pub r: f64,
    pub p: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub n_used: usize,
    /// n_used − 2 − number of covariates.
    pub df: usize,
}

impl CorrelationResult {
    pub fn named(mut self, x: &str, y: &str, covariates: &[&str]) -> Self {
        self.x_name = x.to_string();
        self.y_name = y.to_string();
        self.covariate_names = covariates.iter().map(|s| s.to_string()).collect();
        self
    }
}
