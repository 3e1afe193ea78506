use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::merge::{MergedCohort, Provenance};
use super::parse::{FundusFeatureTable, LipidTable};
use super::{format_cell, CohortError, ParticipantRecord, RowRejection};
use crate::morphometry::canonical_feature_names;

fn io_error(path: &Path, e: impl std::fmt::Display) -> CohortError {
    CohortError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn demographic_cells(r: &ParticipantRecord) -> [String; 3] {
    [
        r.participant_id.clone(),
        format_cell(r.age),
        r.sex.map_or_else(|| "NA".to_string(), |s| s.label().to_string()),
    ]
}

fn write_rows<W: Write>(
    out: W,
    extra_header: &[String],
    rows: impl Iterator<Item = ([String; 3], Vec<String>)>,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["participant_id".to_string(), "age".into(), "sex".into()];
    header.extend_from_slice(extra_header);
    w.write_record(&header)?;
    for (demo, values) in rows {
        w.write_record(demo.iter().chain(values.iter()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fundus<W: Write>(table: &FundusFeatureTable, out: W) -> Result<(), csv::Error> {
    write_rows(
        out,
        &canonical_feature_names(),
        table.rows.iter().map(|r| {
            (
                demographic_cells(&r.record),
                r.values.iter().map(|v| format_cell(*v)).collect(),
            )
        }),
    )
}

pub fn write_lipids<W: Write>(table: &LipidTable, out: W) -> Result<(), csv::Error> {
    write_rows(
        out,
        &table.names,
        table.rows.iter().map(|r| {
            (
                demographic_cells(&r.record),
                r.values.iter().map(|v| format_cell(*v)).collect(),
            )
        }),
    )
}

pub fn write_merged<W: Write>(cohort: &MergedCohort, out: W) -> Result<(), csv::Error> {
    let names: Vec<String> = cohort
        .fundus
        .iter()
        .chain(&cohort.lipids)
        .map(|c| c.name.clone())
        .collect();
    write_rows(
        out,
        &names,
        (0..cohort.len()).map(|i| {
            let record = ParticipantRecord {
                participant_id: cohort.participant_ids[i].clone(),
                age: cohort.age[i],
                sex: cohort.sex[i],
            };
            let values = cohort
                .fundus
                .iter()
                .chain(&cohort.lipids)
                .map(|c| format_cell(c.values[i]))
                .collect();
            (demographic_cells(&record), values)
        }),
    )
}

fn to_file(
    path: &Path,
    f: impl FnOnce(std::io::BufWriter<std::fs::File>) -> Result<(), csv::Error>,
) -> Result<(), CohortError> {
    let file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    f(std::io::BufWriter::new(file)).map_err(|e| io_error(path, e))
}

pub fn write_fundus_csv(table: &FundusFeatureTable, path: &Path) -> Result<(), CohortError> {
    to_file(path, |w| write_fundus(table, w))
}

pub fn write_lipid_csv(table: &LipidTable, path: &Path) -> Result<(), CohortError> {
    to_file(path, |w| write_lipids(table, w))
}

pub fn write_merged_csv(cohort: &MergedCohort, path: &Path) -> Result<(), CohortError> {
    to_file(path, |w| write_merged(cohort, w))
}

#[derive(Serialize)]
struct ProvenanceSidecar<'a> {
    provenance: &'a Provenance,
    sex_encoding: &'static str,
    rejected: &'a [RowRejection],
}

pub fn provenance_json(cohort: &MergedCohort) -> String {
    serde_json::to_string_pretty(&ProvenanceSidecar {
        provenance: &cohort.provenance,
        sex_encoding: "male=0,female=1",
        rejected: &cohort.rejected,
    })
    .expect("serializable")
}

pub fn write_provenance_json(cohort: &MergedCohort, path: &Path) -> Result<(), CohortError> {
    std::fs::write(path, provenance_json(cohort) + "\n").map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::super::parse::{parse_fundus_reader, parse_lipid_reader, FundusRow, LipidParseOptions, LipidRow};
    use super::super::Sex;
    use super::*;

    fn table() -> FundusFeatureTable {
        let rows = (0..5)
            .map(|i| {
                let mut values = [None; 18];
                for (j, v) in values.iter_mut().enumerate() {
                    if (i + j) % 7 != 0 {
                        *v = Some((i * 18 + j) as f64 / 3.0 + 0.1);
                    }
                }
                FundusRow {
                    record: ParticipantRecord {
                        participant_id: format!("p{i}"),
                        age: Some(40.0 + i as f64 * 1.37),
                        sex: Some(if i % 2 == 0 { Sex::Male } else { Sex::Female }),
                    },
                    values,
                }
            })
            .collect();
        FundusFeatureTable { rows, rejected: vec![] }
    }

    #[test]
    fn fundus_round_trip_is_exact() {
        let t = table();
        let mut buf = Vec::new();
        write_fundus(&t, &mut buf).unwrap();
        let back = parse_fundus_reader(buf.as_slice(), Path::new("x")).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.summary(), t.summary());
    }

    #[test]
    fn lipid_round_trip_is_exact() {
        let t = LipidTable {
            names: vec!["pc_34:1".into(), "cer_d18:0/c16:0".into()],
            rows: vec![LipidRow {
                record: ParticipantRecord {
                    participant_id: "a".into(),
                    age: None,
                    sex: Some(Sex::Female),
                },
                values: vec![Some(-0.123456789012345), None],
            }],
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_lipids(&t, &mut buf).unwrap();
        let back = parse_lipid_reader(buf.as_slice(), Path::new("x"), LipidParseOptions::default()).unwrap();
        assert_eq!(back, t);
    }
}
