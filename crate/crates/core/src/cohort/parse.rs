use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_cell, CohortError, ParticipantRecord, RowRejection, Sex};
use crate::morphometry::{canonical_feature_names, FEATURE_COUNT};

/// Lipid subclass prefixes; a column name starting with one of these is a known species.
pub const LIPID_PREFIXES: [&str; 16] = [
    "tag_", "dag_", "cer_", "pc_", "pe_", "ps_", "pg_", "pi_", "sm_", "lysopc_", "lysope_", "glccer_", "laccer_",
    "fa_", "acca_", "gsl_",
];

/// Stand-alone lipid species with no subclass prefix.
const LIPID_SINGLETONS: [(&str, &str); 2] = [
    ("coenzyme_q10", "coenzyme_q10"),
    ("22:6_cholesteryl_ester", "cholesteryl_ester"),
];

/// Subclass tag of a lipid column name, e.g. `tag_50:0` -> `tag`.
pub fn lipid_subclass(name: &str) -> Option<&'static str> {
    let lower = name.to_ascii_lowercase();
    if let Some(&(_, tag)) = LIPID_SINGLETONS.iter().find(|(n, _)| *n == lower) {
        return Some(tag);
    }
    LIPID_PREFIXES
        .iter()
        .find(|p| lower.starts_with(*p))
        .map(|p| p.trim_end_matches('_'))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundusRow {
    pub record: ParticipantRecord,
    /// Canonical feature order; `None` marks a missing cell.
    pub values: [Option<f64>; FEATURE_COUNT],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FundusFeatureTable {
    pub rows: Vec<FundusRow>,
    pub rejected: Vec<RowRejection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipidRow {
    pub record: ParticipantRecord,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LipidTable {
    pub names: Vec<String>,
    pub rows: Vec<LipidRow>,
    /// Columns accepted despite an unrecognised subclass prefix.
    pub unknown_prefix: Vec<String>,
    pub rejected: Vec<RowRejection>,
    /// Cells turned into missing values because they were not positive under the log10 transform.
    pub nonpositive_cells: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipidParseOptions {
    /// Apply log10 to raw intensities on ingest.
    pub log10: bool,
}

struct Header {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Header {
    fn new(record: &csv::StringRecord) -> Result<Self, CohortError> {
        let names: Vec<String> = record.iter().map(|s| s.trim().to_string()).collect();
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.to_ascii_lowercase(), i).is_some() {
                return Err(CohortError::DuplicateColumn(n.clone()));
            }
        }
        Ok(Self { names, index })
    }

    fn find(&self, name: &str) -> Option<usize> {
        self.index.get(&name.to_ascii_lowercase()).copied()
    }

    fn require(&self, name: &str) -> Result<usize, CohortError> {
        self.find(name)
            .ok_or_else(|| CohortError::MissingColumn(name.to_string()))
    }
}

struct Demographics {
    id: usize,
    age: Option<usize>,
    sex: Option<usize>,
}

impl Demographics {
    fn locate(header: &Header) -> Result<Self, CohortError> {
        Ok(Self {
            id: header.require("participant_id")?,
            age: header.find("age"),
            sex: header.find("sex"),
        })
    }

    fn is_demographic(&self, i: usize) -> bool {
        i == self.id || Some(i) == self.age || Some(i) == self.sex
    }

    fn record(&self, row: &csv::StringRecord) -> Result<ParticipantRecord, String> {
        let id = row.get(self.id).unwrap_or("").trim();
        if id.is_empty() {
            return Err("empty participant_id".into());
        }
        let age = match self.age {
            Some(i) => parse_cell(&row[i]).map_err(|e| format!("age: {e}"))?,
            None => None,
        };
        if let Some(a) = age {
            if !(a > 0.0 && a < 120.0) {
                return Err(format!("age {a} outside (0, 120)"));
            }
        }
        let sex = match self.sex.map(|i| row[i].trim()) {
            None => None,
            Some(s) if s.is_empty() || s.eq_ignore_ascii_case("na") => None,
            Some(s) => Some(Sex::parse(s).ok_or_else(|| format!("unrecognised sex `{s}`"))?),
        };
        Ok(ParticipantRecord {
            participant_id: id.to_string(),
            age,
            sex,
        })
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn open(path: &Path) -> Result<std::fs::File, CohortError> {
    std::fs::File::open(path).map_err(|e| CohortError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> CohortError {
    CohortError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Iterates data rows, yielding the row number and the record or a rejection.
fn for_each_row<R: Read>(
    rdr: &mut csv::Reader<R>,
    path: &Path,
    width: usize,
    mut f: impl FnMut(usize, &csv::StringRecord) -> Result<(), CohortError>,
    rejected: &mut Vec<RowRejection>,
) -> Result<(), CohortError> {
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != width {
            rejected.push(RowRejection {
                row: Some(i + 1),
                participant_id: None,
                reason: format!("expected {width} fields, found {}", rec.len()),
            });
            continue;
        }
        f(i + 1, &rec)?;
    }
    Ok(())
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> Result<(), CohortError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CohortError::DuplicateParticipant(id.to_string()));
        }
    }
    Ok(())
}

pub fn parse_fundus_csv(path: &Path) -> Result<FundusFeatureTable, CohortError> {
    parse_fundus_reader(open(path)?, path)
}

/// As [`parse_fundus_csv`]; `source` is only used in error messages.
pub fn parse_fundus_reader<R: Read>(reader: R, source: &Path) -> Result<FundusFeatureTable, CohortError> {
    let mut rdr = csv_reader(reader);
    let header = Header::new(rdr.headers().map_err(|e| csv_error(source, e))?)?;
    let demo = Demographics::locate(&header)?;
    let columns = canonical_feature_names()
        .iter()
        .map(|n| header.require(n))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = FundusFeatureTable::default();
    let mut rejected = Vec::new();
    for_each_row(
        &mut rdr,
        source,
        header.names.len(),
        |row, rec| {
            let parsed = demo.record(rec).and_then(|record| {
                let mut values = [None; FEATURE_COUNT];
                for (slot, &col) in values.iter_mut().zip(&columns) {
                    *slot = parse_cell(&rec[col]).map_err(|e| format!("{}: {e}", header.names[col]))?;
                }
                Ok(FundusRow { record, values })
            });
            match parsed {
                Ok(r) => table.rows.push(r),
                Err(reason) => rejected.push(RowRejection {
                    row: Some(row),
                    participant_id: rec.get(demo.id).map(str::to_string).filter(|s| !s.is_empty()),
                    reason,
                }),
            }
            Ok(())
        },
        &mut table.rejected,
    )?;
    table.rejected.extend(rejected);
    table.rejected.sort_by_key(|r| r.row);
    check_unique(table.rows.iter().map(|r| r.record.participant_id.as_str()))?;
    Ok(table)
}

pub fn parse_lipid_csv(path: &Path, options: LipidParseOptions) -> Result<LipidTable, CohortError> {
    parse_lipid_reader(open(path)?, path, options)
}

pub fn parse_lipid_reader<R: Read>(
    reader: R,
    source: &Path,
    options: LipidParseOptions,
) -> Result<LipidTable, CohortError> {
    let mut rdr = csv_reader(reader);
    let header = Header::new(rdr.headers().map_err(|e| csv_error(source, e))?)?;
    let demo = Demographics::locate(&header)?;
    let columns: Vec<usize> = (0..header.names.len()).filter(|&i| !demo.is_demographic(i)).collect();
    if columns.is_empty() {
        return Err(CohortError::NoLipidColumns);
    }
    let mut table = LipidTable {
        names: columns.iter().map(|&i| header.names[i].clone()).collect(),
        ..Default::default()
    };
    table.unknown_prefix = table
        .names
        .iter()
        .filter(|n| lipid_subclass(n).is_none())
        .cloned()
        .collect();
    if !table.unknown_prefix.is_empty() {
        log::warn!(
            "{}: {} lipid column(s) with unrecognised subclass prefix",
            source.display(),
            table.unknown_prefix.len()
        );
    }

    let mut rejected = Vec::new();
    let mut nonpositive = 0;
    for_each_row(
        &mut rdr,
        source,
        header.names.len(),
        |row, rec| {
            let parsed = demo.record(rec).and_then(|record| {
                let mut values = Vec::with_capacity(columns.len());
                for &col in &columns {
                    let v = parse_cell(&rec[col]).map_err(|e| format!("{}: {e}", header.names[col]))?;
                    values.push(v);
                }
                Ok(LipidRow { record, values })
            });
            match parsed {
                Ok(mut r) => {
                    if options.log10 {
                        for v in r.values.iter_mut() {
                            *v = match *v {
                                Some(x) if x > 0.0 => Some(x.log10()),
                                Some(_) => {
                                    nonpositive += 1;
                                    None
                                }
                                None => None,
                            };
                        }
                    }
                    table.rows.push(r);
                }
                Err(reason) => rejected.push(RowRejection {
                    row: Some(row),
                    participant_id: rec.get(demo.id).map(str::to_string).filter(|s| !s.is_empty()),
                    reason,
                }),
            }
            Ok(())
        },
        &mut table.rejected,
    )?;
    table.rejected.extend(rejected);
    table.rejected.sort_by_key(|r| r.row);
    table.nonpositive_cells = nonpositive;
    check_unique(table.rows.iter().map(|r| r.record.participant_id.as_str()))?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fundus_header() -> String {
        let mut h = vec!["participant_id".to_string(), "age".into(), "sex".into()];
        h.extend(canonical_feature_names());
        h.join(",")
    }

    fn fundus_row(id: &str, age: f64, sex: &str, base: f64) -> String {
        let mut r = vec![id.to_string(), age.to_string(), sex.to_string()];
        r.extend((0..FEATURE_COUNT).map(|i| (base + i as f64).to_string()));
        r.join(",")
    }

    fn fundus(text: &str) -> Result<FundusFeatureTable, CohortError> {
        parse_fundus_reader(text.as_bytes(), Path::new("fundus.csv"))
    }

    fn lipids(text: &str) -> Result<LipidTable, CohortError> {
        parse_lipid_reader(text.as_bytes(), Path::new("lipids.csv"), LipidParseOptions::default())
    }

    #[test]
    fn well_formed_fundus_file() {
        let text = [
            fundus_header(),
            fundus_row("a", 50.0, "M", 1.0),
            fundus_row("b", 51.0, "F", 2.0),
            fundus_row("c", 52.0, "1", 3.0),
        ]
        .join("\n");
        let t = fundus(&text).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[2].record.sex, Some(Sex::Female));
        assert_eq!(t.rows[1].values[17], Some(19.0));
    }

    #[test]
    fn header_is_case_insensitive() {
        let text = [fundus_header().to_uppercase(), fundus_row("a", 50.0, "M", 1.0)].join("\n");
        assert_eq!(fundus(&text).unwrap().rows.len(), 1);
    }

    #[test]
    fn missing_feature_column() {
        let header = fundus_header().replace("vein_average_width,", "");
        match fundus(&header) {
            Err(CohortError::MissingColumn(c)) => assert_eq!(c, "vein_average_width"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_participant() {
        let text = [
            fundus_header(),
            fundus_row("a", 50.0, "M", 1.0),
            fundus_row("a", 50.0, "M", 1.0),
        ]
        .join("\n");
        match fundus(&text) {
            Err(CohortError::DuplicateParticipant(id)) => assert_eq!(id, "a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_rows_rejected_with_reason() {
        let bad = fundus_row("b", 50.0, "M", 1.0).replacen(",1,", ",oops,", 1);
        let text = [
            fundus_header(),
            fundus_row("a", 50.0, "M", 1.0),
            bad,
            fundus_row("c", 150.0, "M", 1.0),
            "d,1,2".to_string(),
            fundus_row("e", 40.0, "M", 1.0).replacen(",2,", ",NA,", 1),
        ]
        .join("\n");
        let t = fundus(&text).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1].values.iter().filter(|v| v.is_none()).count(), 1);
        assert_eq!(t.rejected.len(), 3);
        assert!(t.rejected[0].reason.contains("oops"));
        assert_eq!(t.rejected[0].participant_id.as_deref(), Some("b"));
    }

    #[test]
    fn lipid_columns_and_warnings() {
        let t = lipids("participant_id,age,sex,tag_50:0,dag_36:2\na,50,M,1.0,2.0\n").unwrap();
        assert_eq!(t.names, vec!["tag_50:0", "dag_36:2"]);
        assert!(t.unknown_prefix.is_empty());
        let t = lipids("participant_id,age,sex,xyz_1:0\na,50,M,1.0\n").unwrap();
        assert_eq!(t.unknown_prefix.len(), 1);
        assert!(matches!(
            lipids("participant_id,age,sex\na,50,M\n"),
            Err(CohortError::NoLipidColumns)
        ));
    }

    #[test]
    fn log10_transform() {
        let t = parse_lipid_reader(
            "participant_id,pc_34:1,pc_36:2\na,100,0\n".as_bytes(),
            Path::new("l.csv"),
            LipidParseOptions { log10: true },
        )
        .unwrap();
        assert_eq!(t.rows[0].values, vec![Some(2.0), None]);
        assert_eq!(t.nonpositive_cells, 1);
    }

    #[test]
    fn subclasses() {
        assert_eq!(lipid_subclass("TAG_50:0"), Some("tag"));
        assert_eq!(lipid_subclass("lysopc_16:0"), Some("lysopc"));
        assert_eq!(lipid_subclass("pc_34:1"), Some("pc"));
        assert_eq!(lipid_subclass("glccer_d18:1"), Some("glccer"));
        assert_eq!(lipid_subclass("22:6_cholesteryl_ester"), Some("cholesteryl_ester"));
        assert_eq!(lipid_subclass("coenzyme_q10"), Some("coenzyme_q10"));
        assert_eq!(lipid_subclass("xyz_1:0"), None);
    }
}
