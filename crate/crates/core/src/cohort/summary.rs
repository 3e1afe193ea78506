use serde::{Deserialize, Serialize};

use super::merge::{Column, MergedCohort};
use super::parse::FundusFeatureTable;
use super::Sex;
use crate::morphometry::canonical_feature_names;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Male,
    Female,
    All,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::Male, Stratum::Female, Stratum::All];

    fn admits(self, sex: Option<Sex>) -> bool {
        match self {
            Stratum::Male => sex == Some(Sex::Male),
            Stratum::Female => sex == Some(Sex::Female),
            Stratum::All => true,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Stratum::Male => "male",
            Stratum::Female => "female",
            Stratum::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub stratum: Stratum,
    pub n: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation; absent below two values.
    pub sd: Option<f64>,
}

pub fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (usize, Option<f64>, Option<f64>) {
    let n = values.clone().count();
    if n == 0 {
        return (0, None, None);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let sd = (n > 1).then(|| (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
    (n, Some(mean), sd)
}

/// Mean, SD and count per column for men, women and everyone; missing cells excluded.
pub fn summarize(columns: &[Column], sex: &[Option<Sex>]) -> Vec<ColumnSummary> {
    let mut out = Vec::with_capacity(columns.len() * 3);
    for c in columns {
        for stratum in Stratum::ALL {
            let it = c
                .values
                .iter()
                .zip(sex)
                .filter(move |(_, s)| stratum.admits(**s))
                .filter_map(|(v, _)| *v);
            let (n, mean, sd) = mean_sd(it);
            out.push(ColumnSummary {
                name: c.name.clone(),
                stratum,
                n,
                mean,
                sd,
            });
        }
    }
    out
}

impl MergedCohort {
    /// Summaries of age, the fundus features and every lipid.
    pub fn summary(&self) -> Vec<ColumnSummary> {
        let age = Column {
            name: "age".into(),
            values: self.age.clone(),
        };
        let cols: Vec<Column> = std::iter::once(age)
            .chain(self.fundus.iter().cloned())
            .chain(self.lipids.iter().cloned())
            .collect();
        summarize(&cols, &self.sex)
    }
}

impl FundusFeatureTable {
    pub fn columns(&self) -> Vec<Column> {
        canonical_feature_names()
            .into_iter()
            .enumerate()
            .map(|(i, name)| Column {
                name,
                values: self.rows.iter().map(|r| r.values[i]).collect(),
            })
            .collect()
    }

    pub fn summary(&self) -> Vec<ColumnSummary> {
        let sex: Vec<Option<Sex>> = self.rows.iter().map(|r| r.record.sex).collect();
        summarize(&self.columns(), &sex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[Option<f64>]) -> Column {
        Column {
            name: "x".into(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn hand_arithmetic() {
        let s = summarize(&[col(&[Some(1.0), Some(2.0), Some(3.0)])], &[None, None, None]);
        let all = s.iter().find(|c| c.stratum == Stratum::All).unwrap();
        assert_eq!((all.n, all.mean, all.sd), (3, Some(2.0), Some(1.0)));
        let male = s.iter().find(|c| c.stratum == Stratum::Male).unwrap();
        assert_eq!((male.n, male.mean, male.sd), (0, None, None));
    }

    #[test]
    fn single_value_has_no_sd() {
        let s = summarize(&[col(&[Some(4.0), None])], &[Some(Sex::Female), Some(Sex::Female)]);
        assert_eq!(s[1].n, 1);
        assert_eq!(s[1].mean, Some(4.0));
        assert_eq!(s[1].sd, None);
    }

    #[test]
    fn strata_split_by_sex() {
        let s = summarize(
            &[col(&[Some(1.0), Some(3.0), Some(10.0), Some(20.0)])],
            &[Some(Sex::Male), Some(Sex::Male), Some(Sex::Female), None],
        );
        assert_eq!(s[0].mean, Some(2.0));
        assert_eq!(s[1].mean, Some(10.0));
        assert_eq!(s[2].n, 4);
    }
}
