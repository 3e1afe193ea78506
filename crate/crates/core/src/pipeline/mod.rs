//! Demographic profiling, the fundus × lipid sweep, networks and run manifests.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohort::CohortError;
use crate::stats::{FdrScope, StatsError};

pub mod export;
pub mod manifest;
pub mod network;
pub mod profile;
pub mod simulate;
pub mod sweep;

pub use export::{
    read_associations_csv, write_associations, write_associations_csv, write_network_json, write_skipped_csv,
};
pub use manifest::{sha256_file, sha256_hex, RunCounts, RunManifest};
pub use network::{
    build_network, top_associations, AssociationNetwork, Edge, FundusNode, LipidNode, RankedAssociation,
};
pub use profile::{profile_demographics, DemographicProfile, FeatureProfile};
pub use simulate::{default_lipid_names, simulate_cohort, PlantedEffect, PlantedEffectSpec};
pub use sweep::{lipid_retina_sweep, SkippedTest, SweepOutput};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{feature}: {source}")]
    Stats {
        feature: String,
        #[source]
        source: StatsError,
    },
    #[error(transparent)]
    Adjust(#[from] StatsError),
    #[error(transparent)]
    Cohort(#[from] CohortError),
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("cohort has no {0} features")]
    NoFeatures(&'static str),
    #[error("{}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}: {message}", .path.display())]
    Format { path: PathBuf, message: String },
}

/// Statistical settings shared by profiling, sweep and network construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub q: f64,
    pub r_min: f64,
    pub fdr_scope: FdrScope,
    pub ci_level: f64,
    /// Fundus features need strictly more significant partners than this to enter the network.
    pub min_degree: usize,
    pub top_k: usize,
    pub cluster_cut: f64,
    /// Restrict the sweep to the features retained by demographic screening.
    pub sweep_retained_only: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            q: 0.05,
            r_min: 0.1,
            fdr_scope: FdrScope::Global,
            ci_level: 0.95,
            min_degree: 5,
            top_k: 20,
            cluster_cut: 0.5,
            sweep_retained_only: false,
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}
