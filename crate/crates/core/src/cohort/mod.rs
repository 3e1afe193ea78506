//! Fundus-feature, lipid and demographic tables and their merge.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod export;
pub mod merge;
pub mod parse;
pub mod summary;

pub use export::{write_fundus_csv, write_lipid_csv, write_merged_csv, write_provenance_json};
pub use merge::{merge_cohort, Column, MergedCohort, Provenance};
pub use parse::{
    lipid_subclass, parse_fundus_csv, parse_lipid_csv, FundusFeatureTable, FundusRow, LipidParseOptions, LipidRow,
    LipidTable, LIPID_PREFIXES,
};
pub use summary::{summarize, ColumnSummary, Stratum};

#[derive(Debug, Error)]
pub enum CohortError {
    #[error("{}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}: {message}", .path.display())]
    Csv { path: PathBuf, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("column `{0}` appears more than once")]
    DuplicateColumn(String),
    #[error("participant `{0}` appears more than once")]
    DuplicateParticipant(String),
    #[error("no lipid columns found")]
    NoLipidColumns,
    #[error("table has no usable rows")]
    EmptyTable,
    #[error("fundus and lipid tables share no participants")]
    EmptyJoin,
}

/// Statistical encoding: Male = 0, Female = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    pub fn parse(s: &str) -> Option<Sex> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m" | "male" | "0" => Some(Sex::Male),
            "f" | "female" | "1" => Some(Sex::Female),
            _ => None,
        }
    }

    pub fn code(self) -> f64 {
        match self {
            Sex::Male => 0.0,
            Sex::Female => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sex::Male => "M",
            Sex::Female => "F",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub participant_id: String,
    /// Years. Absent when the source table has no age column or the cell is missing.
    pub age: Option<f64>,
    pub sex: Option<Sex>,
}

/// A row dropped during parsing or merging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRejection {
    /// 1-based data row in the source file, when the row came from a file.
    pub row: Option<usize>,
    pub participant_id: Option<String>,
    pub reason: String,
}

/// `NA` and empty cells are missing; anything else must parse as a finite number.
pub(crate) fn parse_cell(cell: &str) -> Result<Option<f64>, String> {
    let t = cell.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("non-numeric value `{t}`")),
    }
}

pub(crate) fn format_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}
