use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::parse::{FundusFeatureTable, FundusRow, LipidRow, LipidTable};
use super::{CohortError, ParticipantRecord, RowRejection, Sex};
use crate::morphometry::{canonical_feature_names, FEATURE_COUNT};

/// Ages from the two tables may differ by at most this many years.
pub const AGE_TOLERANCE_YEARS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Column {
    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub n_fundus: usize,
    pub n_lipid: usize,
    pub n_fundus_only: usize,
    pub n_lipid_only: usize,
    pub n_joined: usize,
    pub n_rejected: usize,
}

/// Participant-joined analysis table, rows sorted by participant id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedCohort {
    pub participant_ids: Vec<String>,
    pub age: Vec<Option<f64>>,
    pub sex: Vec<Option<Sex>>,
    /// The 18 fundus features in canonical order.
    pub fundus: Vec<Column>,
    pub lipids: Vec<Column>,
    pub provenance: Provenance,
    pub rejected: Vec<RowRejection>,
}

impl MergedCohort {
    pub fn len(&self) -> usize {
        self.participant_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participant_ids.is_empty()
    }

    pub fn sex_codes(&self) -> Vec<Option<f64>> {
        self.sex.iter().map(|s| s.map(Sex::code)).collect()
    }

    pub fn fundus_column(&self, name: &str) -> Option<&Column> {
        self.fundus.iter().find(|c| c.name.eq_ignore_ascii_case(name))
    }

    pub fn lipid_column(&self, name: &str) -> Option<&Column> {
        self.lipids.iter().find(|c| c.name.eq_ignore_ascii_case(name))
    }

    fn record(&self, i: usize) -> ParticipantRecord {
        ParticipantRecord {
            participant_id: self.participant_ids[i].clone(),
            age: self.age[i],
            sex: self.sex[i],
        }
    }

    /// Splits back into the two source tables, both carrying age and sex.
    pub fn split(&self) -> (FundusFeatureTable, LipidTable) {
        let mut fundus = FundusFeatureTable::default();
        let mut lipids = LipidTable {
            names: self.lipids.iter().map(|c| c.name.clone()).collect(),
            ..Default::default()
        };
        for i in 0..self.len() {
            let mut values = [None; FEATURE_COUNT];
            for (v, c) in values.iter_mut().zip(&self.fundus) {
                *v = c.values[i];
            }
            fundus.rows.push(FundusRow {
                record: self.record(i),
                values,
            });
            lipids.rows.push(LipidRow {
                record: self.record(i),
                values: self.lipids.iter().map(|c| c.values[i]).collect(),
            });
        }
        (fundus, lipids)
    }
}

fn consistency(f: &ParticipantRecord, l: &ParticipantRecord) -> Result<(Option<f64>, Option<Sex>), String> {
    if let (Some(a), Some(b)) = (f.age, l.age) {
        if (a - b).abs() > AGE_TOLERANCE_YEARS {
            return Err(format!("age differs between tables ({a} vs {b})"));
        }
    }
    if let (Some(a), Some(b)) = (f.sex, l.sex) {
        if a != b {
            return Err(format!("sex differs between tables ({} vs {})", a.label(), b.label()));
        }
    }
    Ok((f.age.or(l.age), f.sex.or(l.sex)))
}

/// Inner join on participant id. Age and sex are taken from the fundus table,
/// falling back to the lipid table where the fundus cell is missing.
pub fn merge_cohort(fundus: &FundusFeatureTable, lipids: &LipidTable) -> Result<MergedCohort, CohortError> {
    if fundus.rows.is_empty() || lipids.rows.is_empty() {
        return Err(CohortError::EmptyTable);
    }
    let lipid_index: HashMap<&str, &LipidRow> = lipids
        .rows
        .iter()
        .map(|r| (r.record.participant_id.as_str(), r))
        .collect();
    let mut pairs: Vec<(&FundusRow, &LipidRow)> = fundus
        .rows
        .iter()
        .filter_map(|f| lipid_index.get(f.record.participant_id.as_str()).map(|l| (f, *l)))
        .collect();
    if pairs.is_empty() {
        return Err(CohortError::EmptyJoin);
    }
    pairs.sort_by(|a, b| a.0.record.participant_id.cmp(&b.0.record.participant_id));

    let overlap = pairs.len();
    let mut cohort = MergedCohort {
        participant_ids: Vec::with_capacity(overlap),
        age: Vec::with_capacity(overlap),
        sex: Vec::with_capacity(overlap),
        fundus: canonical_feature_names()
            .into_iter()
            .map(|name| Column {
                name,
                values: Vec::with_capacity(overlap),
            })
            .collect(),
        lipids: lipids
            .names
            .iter()
            .map(|name| Column {
                name: name.clone(),
                values: Vec::with_capacity(overlap),
            })
            .collect(),
        provenance: Provenance {
            n_fundus: fundus.rows.len(),
            n_lipid: lipids.rows.len(),
            n_fundus_only: fundus.rows.len() - overlap,
            n_lipid_only: lipids.rows.len() - overlap,
            ..Default::default()
        },
        rejected: Vec::new(),
    };

    for (f, l) in pairs {
        match consistency(&f.record, &l.record) {
            Ok((age, sex)) => {
                cohort.participant_ids.push(f.record.participant_id.clone());
                cohort.age.push(age);
                cohort.sex.push(sex);
                for (c, v) in cohort.fundus.iter_mut().zip(f.values) {
                    c.values.push(v);
                }
                for (c, v) in cohort.lipids.iter_mut().zip(&l.values) {
                    c.values.push(*v);
                }
            }
            Err(reason) => cohort.rejected.push(RowRejection {
                row: None,
                participant_id: Some(f.record.participant_id.clone()),
                reason,
            }),
        }
    }
    cohort.provenance.n_joined = cohort.len();
    cohort.provenance.n_rejected = cohort.rejected.len();
    if cohort.is_empty() {
        return Err(CohortError::EmptyJoin);
    }
    Ok(cohort)
}
