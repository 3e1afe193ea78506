//! Figures and tables rendered from analysis outputs. Each figure is a
//! standalone SVG plus a JSON sidecar holding exactly the numbers drawn.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod bars;
pub mod bubble;
pub mod demographics;
pub mod distribution;
pub mod forest;
pub mod network;
pub mod svg;
pub mod tables;

pub use bars::{render_count_bars, significant_counts};
pub use bubble::{bubble_axes, render_bubble};
pub use demographics::{render_demographic_panels, CohortView, DemographicOptions};
pub use distribution::{box_summary, quantile_sorted, BoxSummary};
pub use forest::render_forest;
pub use network::render_network;
pub use tables::{associations_table, summary_table1};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0} axis is empty")]
    EmptyAxis(&'static str),
    #[error("{}: {message}", .path.display())]
    Io { path: PathBuf, message: String },
}

/// Recoverable conditions met while rendering; the figure is still produced.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportWarning {
    #[error("no result for {fundus} / {lipid}; cell left blank")]
    MissingCell { fundus: String, lipid: String },
    #[error("{feature}: age bin [{start}, {end}) has {rows} rows; merged with its neighbour")]
    BinTooSmall {
        feature: String,
        start: f64,
        end: f64,
        rows: usize,
    },
    #[error("network is empty; placeholder drawn")]
    EmptyNetwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    DemographicPanel,
    Bubble,
    CountBar,
    Network,
    Forest,
}

impl PlotKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            PlotKind::DemographicPanel => "fig1_demographics",
            PlotKind::Bubble => "fig3_bubble",
            PlotKind::CountBar => "fig4_counts",
            PlotKind::Network => "fig5_network",
            PlotKind::Forest => "fig10_forest",
        }
    }

    pub fn default_title(self) -> &'static str {
        match self {
            PlotKind::DemographicPanel => "Fundus features by age and sex",
            PlotKind::Bubble => "Partial correlations of lipid species with fundus features",
            PlotKind::CountBar => "Significant lipid partners per fundus feature",
            PlotKind::Network => "Fundus feature and lipid species associations",
            PlotKind::Forest => "Strongest fundus and lipid associations",
        }
    }
}

/// Presentation settings for one figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    /// Overall width in px; heights follow from the content.
    pub width: f64,
    /// Bubble radius for the largest |r| in the grid.
    pub max_radius: f64,
    pub min_radius: f64,
}

impl PlotSpec {
    pub fn new(kind: PlotKind) -> Self {
        let width = match kind {
            PlotKind::DemographicPanel => 1140.0,
            PlotKind::Bubble => 0.0,
            PlotKind::CountBar => 760.0,
            PlotKind::Network => 900.0,
            PlotKind::Forest => 980.0,
        };
        Self {
            kind,
            title: kind.default_title().into(),
            width,
            max_radius: 9.0,
            min_radius: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFigure {
    pub kind: PlotKind,
    pub svg: String,
    /// Plot data; numbers appear here exactly as written into the SVG.
    pub data: serde_json::Value,
    pub warnings: Vec<ReportWarning>,
}

impl RenderedFigure {
    pub fn sidecar_json(&self) -> String {
        let doc = serde_json::json!({
            "figure": self.kind.file_stem(),
            "data": self.data,
            "warnings": self.warnings,
        });
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RenderedReport {
    pub figures: Vec<RenderedFigure>,
    /// (file name, CSV text) pairs.
    pub tables: Vec<(String, String)>,
}

impl RenderedReport {
    /// Writes `figures/*.svg`, `figures/*.json` and `tables/*.csv` under `dir`,
    /// returning the written paths in order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
        let io = |path: &Path, e: std::io::Error| ReportError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let figures = dir.join("figures");
        let tables = dir.join("tables");
        for d in [&figures, &tables] {
            std::fs::create_dir_all(d).map_err(|e| io(d, e))?;
        }
        let mut written = Vec::new();
        for fig in &self.figures {
            let stem = fig.kind.file_stem();
            for (path, body) in [
                (figures.join(format!("{stem}.svg")), &fig.svg),
                (figures.join(format!("{stem}.json")), &fig.sidecar_json()),
            ] {
                std::fs::write(&path, body).map_err(|e| io(&path, e))?;
                written.push(path);
            }
        }
        for (name, body) in &self.tables {
            let path = tables.join(name);
            std::fs::write(&path, body).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}
