use serde::{Deserialize, Serialize};

use super::{AnalysisConfig, PipelineError};
use crate::cohort::{summarize, ColumnSummary, MergedCohort};
use crate::stats::correlation::partial_correlation_missing;
use crate::stats::{
    cluster_features, correlation_matrix, screen_features, AdjustedResultSet, CorrelationResult, FdrScope,
    FeatureClusterTree, ScreenOutcome,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureProfile {
    pub feature: String,
    /// Feature against age, controlling for sex.
    pub age: CorrelationResult,
    pub age_p_adjusted: f64,
    /// Feature against sex (male = 0, female = 1), controlling for age.
    pub sex: CorrelationResult,
    pub sex_p_adjusted: f64,
    /// Male, female and overall mean ± SD.
    pub summary: Vec<ColumnSummary>,
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicProfile {
    pub features: Vec<FeatureProfile>,
    pub screen: ScreenOutcome,
    /// Clustering of the retained features on 1 − |r|.
    pub clusters: FeatureClusterTree,
    pub q: f64,
    pub r_min: f64,
}

impl DemographicProfile {
    pub fn get(&self, feature: &str) -> Option<&FeatureProfile> {
        self.features.iter().find(|f| f.feature == feature)
    }
}

/// Age and sex associations of every fundus feature, with screening on the
/// age association (|r| ≥ r_min and adjusted p < q) and clustering of the survivors.
pub fn profile_demographics(
    cohort: &MergedCohort,
    config: &AnalysisConfig,
) -> Result<DemographicProfile, PipelineError> {
    let sex = cohort.sex_codes();
    let age = &cohort.age;
    let mut age_results = Vec::with_capacity(cohort.fundus.len());
    let mut sex_results = Vec::with_capacity(cohort.fundus.len());
    for col in &cohort.fundus {
        let wrap = |source| PipelineError::Stats {
            feature: col.name.clone(),
            source,
        };
        let a = partial_correlation_missing(&col.values, age, &[&sex], config.ci_level).map_err(wrap)?;
        age_results.push(a.named(&col.name, "age", &["sex"]));
        let s = partial_correlation_missing(&col.values, &sex, &[age], config.ci_level).map_err(wrap)?;
        sex_results.push(s.named(&col.name, "sex", &["age"]));
    }
    let age_set = AdjustedResultSet::adjust(age_results, config.q, FdrScope::Global)?;
    let sex_set = AdjustedResultSet::adjust(sex_results, config.q, FdrScope::Global)?;
    let screen = screen_features(&age_set, config.r_min, config.q);

    let summaries = summarize(&cohort.fundus, &cohort.sex);
    let features = cohort
        .fundus
        .iter()
        .enumerate()
        .map(|(i, col)| FeatureProfile {
            feature: col.name.clone(),
            age: age_set.results[i].clone(),
            age_p_adjusted: age_set.p_adjusted[i],
            sex: sex_set.results[i].clone(),
            sex_p_adjusted: sex_set.p_adjusted[i],
            summary: summaries[3 * i..3 * i + 3].to_vec(),
            retained: screen.retained.contains(&col.name),
        })
        .collect();

    let retained_cols: Vec<&[Option<f64>]> = screen
        .retained
        .iter()
        .filter_map(|n| cohort.fundus_column(n))
        .map(|c| c.values.as_slice())
        .collect();
    let clusters = cluster_features(
        &screen.retained,
        &correlation_matrix(&retained_cols),
        config.cluster_cut,
    );

    Ok(DemographicProfile {
        features,
        screen,
        clusters,
        q: config.q,
        r_min: config.r_min,
    })
}
