use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalysisConfig, PipelineError};
use crate::cohort::{Column, MergedCohort};
use crate::stats::correlation::{partial_correlation_missing, residual_correlation};
use crate::stats::{AdjustedResultSet, CorrelationResult, OrthoBasis, StatsError};

const COVARIATES: [&str; 2] = ["age", "sex"];

/// A pair that could not be tested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTest {
    pub x_name: String,
    pub y_name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub set: AdjustedResultSet,
    pub skipped: Vec<SkippedTest>,
    pub attempted: usize,
}

/// Columns restricted to the covariate-complete rows, with residuals precomputed.
/// Only columns without gaps on those rows are cached; the rest take the per-pair path.
struct ResidualCache {
    basis: OrthoBasis,
    rows: Vec<usize>,
}

impl ResidualCache {
    fn new(age: &[Option<f64>], sex: &[Option<f64>]) -> Option<Self> {
        let rows: Vec<usize> = (0..age.len())
            .filter(|&i| age[i].is_some() && sex[i].is_some())
            .collect();
        let a: Vec<f64> = rows.iter().map(|&i| age[i].unwrap()).collect();
        let s: Vec<f64> = rows.iter().map(|&i| sex[i].unwrap()).collect();
        let basis = OrthoBasis::new(rows.len(), &[&a, &s]).ok()?;
        Some(Self { basis, rows })
    }

    fn column(&self, col: &Column) -> Option<(Vec<f64>, Vec<f64>)> {
        let raw: Option<Vec<f64>> = self.rows.iter().map(|&i| col.values[i]).collect();
        let raw = raw?;
        let res = self.basis.residualize(&raw);
        Some((raw, res))
    }
}

/// Partial correlation of every (fundus, lipid) pair controlling for age and sex,
/// followed by FDR adjustment. Results are ordered by (fundus name, lipid name);
/// failing pairs are listed in `skipped`.
pub fn lipid_retina_sweep(
    cohort: &MergedCohort,
    features: Option<&[String]>,
    config: &AnalysisConfig,
) -> Result<SweepOutput, PipelineError> {
    sweep(cohort, features, config, true)
}

/// The sweep without the residual cache; every pair is computed from scratch.
#[doc(hidden)]
pub fn lipid_retina_sweep_uncached(
    cohort: &MergedCohort,
    features: Option<&[String]>,
    config: &AnalysisConfig,
) -> Result<SweepOutput, PipelineError> {
    sweep(cohort, features, config, false)
}

fn sweep(
    cohort: &MergedCohort,
    features: Option<&[String]>,
    config: &AnalysisConfig,
    cached: bool,
) -> Result<SweepOutput, PipelineError> {
    let mut fundus: Vec<&Column> = cohort
        .fundus
        .iter()
        .filter(|c| features.is_none_or(|f| f.iter().any(|n| n.eq_ignore_ascii_case(&c.name))))
        .collect();
    if fundus.is_empty() {
        return Err(PipelineError::NoFeatures("fundus"));
    }
    let mut lipids: Vec<&Column> = cohort.lipids.iter().collect();
    if lipids.is_empty() {
        return Err(PipelineError::NoFeatures("lipid"));
    }
    fundus.sort_by(|a, b| a.name.cmp(&b.name));
    lipids.sort_by(|a, b| a.name.cmp(&b.name));

    let sex = cohort.sex_codes();
    let age = &cohort.age;
    let cache = if cached { ResidualCache::new(age, &sex) } else { None };
    let prepare = |cols: &[&Column]| -> Vec<Option<(Vec<f64>, Vec<f64>)>> {
        cols.par_iter()
            .map(|c| cache.as_ref().and_then(|k| k.column(c)))
            .collect()
    };
    let fundus_res = prepare(&fundus);
    let lipid_res = prepare(&lipids);

    let pairs: Vec<(usize, usize)> = (0..fundus.len())
        .flat_map(|f| (0..lipids.len()).map(move |l| (f, l)))
        .collect();
    let outcomes: Vec<Result<CorrelationResult, StatsError>> = pairs
        .par_iter()
        .map(|&(f, l)| match (&fundus_res[f], &lipid_res[l]) {
            (Some((x, rx)), Some((y, ry))) => residual_correlation(x, y, rx, ry, COVARIATES.len(), config.ci_level),
            _ => partial_correlation_missing(&fundus[f].values, &lipids[l].values, &[age, &sex], config.ci_level),
        })
        .collect();

    let mut results = Vec::with_capacity(pairs.len());
    let mut skipped = Vec::new();
    for (&(f, l), outcome) in pairs.iter().zip(outcomes) {
        let (x, y) = (&fundus[f].name, &lipids[l].name);
        match outcome {
            Ok(r) => results.push(r.named(x, y, &COVARIATES)),
            Err(e) => skipped.push(SkippedTest {
                x_name: x.clone(),
                y_name: y.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if !skipped.is_empty() {
        log::warn!("{} of {} tests skipped", skipped.len(), pairs.len());
    }
    Ok(SweepOutput {
        set: AdjustedResultSet::adjust(results, config.q, config.fdr_scope)?,
        skipped,
        attempted: pairs.len(),
    })
}
