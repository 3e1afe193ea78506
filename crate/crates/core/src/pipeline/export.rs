use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::network::AssociationNetwork;
use super::sweep::SkippedTest;
use super::{io_error, PipelineError};
use crate::stats::{AdjustedResultSet, CorrelationResult, FdrScope};

pub const ASSOCIATION_HEADER: [&str; 8] = [
    "fundus_feature",
    "lipid_feature",
    "r",
    "CI_lower",
    "CI_upper",
    "P-value",
    "P-adjusted",
    "n",
];

pub fn write_associations<W: Write>(set: &AdjustedResultSet, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ASSOCIATION_HEADER)?;
    for (r, p_adj) in set.results.iter().zip(&set.p_adjusted) {
        w.write_record([
            r.x_name.clone(),
            r.y_name.clone(),
            r.r.to_string(),
            r.ci_lower.to_string(),
            r.ci_upper.to_string(),
            r.p.to_string(),
            p_adj.to_string(),
            r.n_used.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_associations_csv(set: &AdjustedResultSet, path: &Path) -> Result<(), PipelineError> {
    let file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    write_associations(set, std::io::BufWriter::new(file)).map_err(|e| io_error(path, e))
}

/// Reads an associations export back. `q`, the FDR scope and the covariate
/// names are not part of the table and must be supplied.
pub fn read_associations_csv(
    path: &Path,
    q: f64,
    scope: FdrScope,
    covariates: &[String],
) -> Result<AdjustedResultSet, PipelineError> {
    let format = |message: String| PipelineError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = rdr.headers().map_err(|e| format(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ASSOCIATION_HEADER {
        return Err(format(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut results = Vec::new();
    let mut p_adjusted = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format(e.to_string()))?;
        let num = |j: usize| -> Result<f64, PipelineError> {
            rec[j]
                .parse()
                .map_err(|_| format(format!("row {}: bad number `{}`", i + 1, &rec[j])))
        };
        let n: usize = rec[7]
            .parse()
            .map_err(|_| format(format!("row {}: bad count", i + 1)))?;
        results.push(CorrelationResult {
            x_name: rec[0].to_string(),
            y_name: rec[1].to_string(),
            covariate_names: covariates.to_vec(),
            r: num(2)?,
            p: num(5)?,
            ci_lower: num(3)?,
            ci_upper: num(4)?,
            n_used: n,
            df: n.saturating_sub(2 + covariates.len()),
        });
        p_adjusted.push(num(6)?);
    }
    let significant = p_adjusted.iter().map(|&p| p < q).collect();
    Ok(AdjustedResultSet {
        results,
        p_adjusted,
        significant,
        q,
        scope,
    })
}

pub fn write_skipped_csv(skipped: &[SkippedTest], path: &Path) -> Result<(), PipelineError> {
    let run = || -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["fundus_feature", "lipid_feature", "reason"])?;
        for s in skipped {
            w.write_record([&s.x_name, &s.y_name, &s.reason])?;
        }
        w.flush()?;
        Ok(())
    };
    run().map_err(|e| io_error(path, e))
}

#[derive(Serialize)]
struct NodeOut<'a> {
    id: &'a str,
    side: &'static str,
    subclass: Option<&'a str>,
    degree: usize,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    source: &'a str,
    target: &'a str,
    r: f64,
    p_adjusted: f64,
    sign: i8,
}

#[derive(Serialize)]
struct NetworkOut<'a> {
    nodes: Vec<NodeOut<'a>>,
    edges: Vec<EdgeOut<'a>>,
}

pub fn network_json(network: &AssociationNetwork) -> String {
    let nodes = network
        .fundus_nodes
        .iter()
        .map(|n| NodeOut {
            id: &n.name,
            side: "fundus",
            subclass: None,
            degree: n.degree,
        })
        .chain(network.lipid_nodes.iter().map(|n| NodeOut {
            id: &n.name,
            side: "lipid",
            subclass: n.subclass.as_deref(),
            degree: n.degree,
        }))
        .collect();
    let edges = network
        .edges
        .iter()
        .map(|e| EdgeOut {
            source: &e.fundus,
            target: &e.lipid,
            r: e.r,
            p_adjusted: e.p_adjusted,
            sign: e.sign,
        })
        .collect();
    serde_json::to_string_pretty(&NetworkOut { nodes, edges }).expect("serializable") + "\n"
}

pub fn write_network_json(network: &AssociationNetwork, path: &Path) -> Result<(), PipelineError> {
    std::fs::write(path, network_json(network)).map_err(|e| io_error(path, e))
}
