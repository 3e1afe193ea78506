//! The subcommands. Each reads its inputs, does its work and writes under the
//! configured output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use oculolipid::cohort::{
    merge_cohort, parse_fundus_csv, parse_lipid_csv, write_fundus_csv, write_lipid_csv, write_merged_csv,
    write_provenance_json, CohortError, FundusFeatureTable, FundusRow, LipidParseOptions, ParticipantRecord,
};
use oculolipid::morphometry::io::scan_mask_dir;
use oculolipid::morphometry::{average_bilateral, extract_features, Eye, MorphometricFeatureSet};
use oculolipid::pipeline::{
    build_network, lipid_retina_sweep, profile_demographics, read_associations_csv, simulate_cohort, top_associations,
    write_associations_csv, write_network_json, write_skipped_csv, AnalysisConfig, DemographicProfile, PipelineError,
    PlantedEffectSpec, RunCounts, RunManifest,
};
use oculolipid::report::{
    associations_table, bubble_axes, render_bubble, render_count_bars, render_demographic_panels, render_forest,
    render_network, summary_table1, CohortView, DemographicOptions, PlotKind, PlotSpec, RenderedReport,
};
use oculolipid::stats::FdrScope;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::RunConfig;

/// Failure classes, each with a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn mkdir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| internal(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{what} `{}` does not exist", path.display())))
    }
}

/// Output locations under the run's output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
        }
    }
    pub fn extract(&self) -> PathBuf {
        self.root.join("extract")
    }
    pub fn extracted_fundus(&self) -> PathBuf {
        self.extract().join("fundus_features.csv")
    }
    pub fn simulate(&self) -> PathBuf {
        self.root.join("simulate")
    }
    pub fn simulated_fundus(&self) -> PathBuf {
        self.simulate().join("fundus.csv")
    }
    pub fn simulated_lipids(&self) -> PathBuf {
        self.simulate().join("lipids.csv")
    }
    pub fn analysis(&self) -> PathBuf {
        self.root.join("analysis")
    }
}

pub fn extract(config: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = config
        .masks_dir
        .as_deref()
        .ok_or_else(|| CliError::Usage("masks_dir is not set".into()))?;
    if !dir.is_dir() {
        return Err(CliError::Usage(format!(
            "masks_dir `{}` is not a directory",
            dir.display()
        )));
    }
    let layout = Layout::new(&config.out_dir);
    let scan = scan_mask_dir(dir, &config.morphometry).map_err(data)?;
    for (path, message) in &scan.errors {
        warn!("skipping {}: {message}", path.display());
    }
    info!("extracting features from {} masks", scan.masks.len());
    let features: Vec<MorphometricFeatureSet> = scan
        .masks
        .par_iter()
        .map(|m| extract_features(m, &config.morphometry))
        .collect();

    let mut eyes: BTreeMap<&str, [Option<&MorphometricFeatureSet>; 2]> = BTreeMap::new();
    for (mask, fs) in scan.masks.iter().zip(&features) {
        let slot = eyes.entry(mask.participant_id.as_str()).or_default();
        slot[usize::from(mask.eye == Eye::Right)] = Some(fs);
        for bad in &fs.invalid {
            warn!(
                "{} {}: {} unavailable ({})",
                mask.participant_id,
                mask.eye.code(),
                bad.feature,
                bad.reason
            );
        }
    }
    let mut table = FundusFeatureTable::default();
    for (id, [left, right]) in eyes {
        let avg = average_bilateral(left, right).map_err(internal)?;
        table.rows.push(FundusRow {
            record: ParticipantRecord {
                participant_id: id.to_string(),
                age: None,
                sex: None,
            },
            values: *avg.values(),
        });
    }
    if table.rows.is_empty() {
        return Err(CliError::Data(format!(
            "no participant could be processed from `{}`",
            dir.display()
        )));
    }
    mkdir(&layout.extract())?;
    let out = layout.extracted_fundus();
    write_fundus_csv(&table, &out).map_err(internal)?;
    let mut errors = String::from("file,message\n");
    for (path, message) in &scan.errors {
        let name = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        errors.push_str(&format!(
            "\"{}\",\"{}\"\n",
            name.replace('"', "\"\""),
            message.replace('"', "\"\"")
        ));
    }
    write_text(&layout.extract().join("extraction_errors.csv"), &errors)?;
    info!("wrote {} participants to {}", table.rows.len(), out.display());
    Ok(out)
}

pub fn load_spec(config: &RunConfig) -> Result<PlantedEffectSpec, CliError> {
    let mut spec = match &config.simulate_spec {
        None => PlantedEffectSpec::default(),
        Some(path) => {
            require_file(path, "simulate_spec")?;
            let text = std::fs::read_to_string(path).map_err(data)?;
            let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
                serde_json::from_str(&text).map_err(|e| e.to_string())
            } else {
                toml::from_str(&text).map_err(|e| e.to_string())
            };
            parsed.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(n) = config.simulate_n {
        spec.n = n;
    }
    Ok(spec)
}

#[derive(Debug, Clone)]
pub struct SimulatedFiles {
    pub fundus: PathBuf,
    pub lipids: PathBuf,
    pub ground_truth: PathBuf,
}

pub fn simulate(config: &RunConfig) -> Result<SimulatedFiles, CliError> {
    let spec = load_spec(config)?;
    let cohort = simulate_cohort(&spec, config.seed).map_err(data)?;
    let layout = Layout::new(&config.out_dir);
    mkdir(&layout.simulate())?;
    let (fundus, lipids) = cohort.split();
    let files = SimulatedFiles {
        fundus: layout.simulated_fundus(),
        lipids: layout.simulated_lipids(),
        ground_truth: layout.simulate().join("ground_truth.json"),
    };
    write_fundus_csv(&fundus, &files.fundus).map_err(internal)?;
    write_lipid_csv(&lipids, &files.lipids).map_err(internal)?;
    let truth = serde_json::json!({
        "seed": config.seed,
        "n": spec.n,
        "planted": spec.planted,
        "spec": spec,
    });
    write_text(
        &files.ground_truth,
        &(serde_json::to_string_pretty(&truth).map_err(internal)? + "\n"),
    )?;
    info!(
        "simulated {} participants with {} planted effects",
        spec.n,
        spec.planted.len()
    );
    Ok(files)
}

fn input_paths(config: &RunConfig) -> (PathBuf, PathBuf) {
    let layout = Layout::new(&config.out_dir);
    let fundus = config.fundus_csv.clone().unwrap_or_else(|| {
        let extracted = layout.extracted_fundus();
        if extracted.is_file() {
            extracted
        } else {
            layout.simulated_fundus()
        }
    });
    let lipids = config.lipid_csv.clone().unwrap_or_else(|| layout.simulated_lipids());
    (fundus, lipids)
}

fn cohort_error(e: CohortError) -> CliError {
    data(e)
}

fn pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Io { .. } => internal(e),
        other => data(other),
    }
}

/// Merge, demographic profile, sweep, network and exports. Without configured
/// inputs, falls back to the extracted or simulated files under the output directory.
pub fn analyze(config: &RunConfig) -> Result<RunManifest, CliError> {
    let (fundus_path, lipid_path) = input_paths(config);
    require_file(&fundus_path, "fundus CSV")?;
    require_file(&lipid_path, "lipid CSV")?;

    let fundus = parse_fundus_csv(&fundus_path).map_err(cohort_error)?;
    let lipids = parse_lipid_csv(
        &lipid_path,
        LipidParseOptions {
            log10: config.lipid_log10,
        },
    )
    .map_err(cohort_error)?;
    let cohort = merge_cohort(&fundus, &lipids).map_err(cohort_error)?;
    for r in cohort.rejected.iter().take(20) {
        warn!(
            "row rejected ({}): {}",
            r.participant_id.as_deref().unwrap_or("?"),
            r.reason
        );
    }
    info!(
        "merged cohort: {} participants, {} fundus and {} lipid features",
        cohort.len(),
        cohort.fundus.len(),
        cohort.lipids.len()
    );

    let analysis = &config.analysis;
    let profile = profile_demographics(&cohort, analysis).map_err(pipeline_error)?;
    info!(
        "demographic screening retained {} of {} features",
        profile.screen.retained.len(),
        profile.screen.n_input()
    );
    let filter = analysis
        .sweep_retained_only
        .then_some(profile.screen.retained.as_slice());
    let sweep = lipid_retina_sweep(&cohort, filter, analysis).map_err(pipeline_error)?;
    let network = build_network(&sweep.set, analysis.min_degree, analysis.q);
    info!(
        "{} tests, {} skipped, {} significant at q = {}",
        sweep.set.len(),
        sweep.skipped.len(),
        sweep.set.significant_count(),
        analysis.q
    );

    let dir = Layout::new(&config.out_dir).analysis();
    mkdir(&dir)?;
    let outputs = [
        "associations.csv",
        "network.json",
        "skipped_tests.csv",
        "demographic_profile.json",
        "merged_cohort.csv",
        "merged_cohort.json",
    ]
    .map(|n| dir.join(n));
    write_associations_csv(&sweep.set, &outputs[0]).map_err(internal)?;
    write_network_json(&network, &outputs[1]).map_err(internal)?;
    write_skipped_csv(&sweep.skipped, &outputs[2]).map_err(internal)?;
    write_text(
        &outputs[3],
        &(serde_json::to_string_pretty(&profile).map_err(internal)? + "\n"),
    )?;
    write_merged_csv(&cohort, &outputs[4]).map_err(internal)?;
    write_provenance_json(&cohort, &outputs[5]).map_err(internal)?;

    let counts = RunCounts {
        n_participants: cohort.len(),
        n_fundus_features: cohort.fundus.len(),
        n_lipid_features: cohort.lipids.len(),
        n_tests_attempted: sweep.attempted,
        n_tests: sweep.set.len(),
        n_skipped: sweep.skipped.len(),
        n_significant: sweep.set.significant_count(),
    };
    let mut manifest = RunManifest::new(config.snapshot(), counts);
    manifest.add_input(&fundus_path).map_err(internal)?;
    manifest.add_input(&lipid_path).map_err(internal)?;
    for p in &outputs {
        manifest.add_output(p).map_err(internal)?;
    }
    manifest.write(&dir.join("run_manifest.json")).map_err(internal)?;
    Ok(manifest)
}

/// Renders the five figures and two tables from the analysis outputs.
pub fn report(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let layout = Layout::new(&config.out_dir);
    let dir = layout.analysis();
    let needed = [
        "run_manifest.json",
        "associations.csv",
        "demographic_profile.json",
        "merged_cohort.csv",
    ];
    if let Some(missing) = needed.iter().map(|n| dir.join(n)).find(|p| !p.is_file()) {
        return Err(CliError::Data(format!(
            "analysis output `{}` is missing; run `analyze` first",
            missing.display()
        )));
    }
    let manifest = RunManifest::read(&dir.join("run_manifest.json")).map_err(data)?;
    let analysis: AnalysisConfig = serde_json::from_value(manifest.config.clone()).map_err(data)?;
    let scope: FdrScope = analysis.fdr_scope;
    let set =
        read_associations_csv(&dir.join("associations.csv"), analysis.q, scope, &manifest.covariates).map_err(data)?;
    let profile: DemographicProfile =
        serde_json::from_str(&std::fs::read_to_string(dir.join("demographic_profile.json")).map_err(data)?)
            .map_err(data)?;
    let fundus = parse_fundus_csv(&dir.join("merged_cohort.csv")).map_err(data)?;
    let view = CohortView::from(&fundus);

    let (auto_fundus, auto_lipids) = bubble_axes(&set, config.bubble_n_fundus, config.bubble_n_lipids);
    let pick = |given: &Vec<String>, auto: Vec<String>| if given.is_empty() { auto } else { given.clone() };
    let bubble_fundus = pick(&config.bubble_fundus, auto_fundus);
    let bubble_lipids = pick(&config.bubble_lipids, auto_lipids);
    let all_features: Vec<String> = profile.features.iter().map(|f| f.feature.clone()).collect();
    let network = build_network(&set, analysis.min_degree, analysis.q);
    let top = top_associations(&set, analysis.top_k);

    let mut figures = vec![render_demographic_panels(
        &profile,
        &view,
        &PlotSpec::new(PlotKind::DemographicPanel),
        &DemographicOptions {
            features: (!config.panel_features.is_empty()).then(|| config.panel_features.clone()),
            age_density: config.age_density,
            ..Default::default()
        },
    )];
    if bubble_fundus.is_empty() || bubble_lipids.is_empty() {
        warn!("no results to place in the bubble grid");
    } else {
        figures
            .push(render_bubble(&set, &bubble_fundus, &bubble_lipids, &PlotSpec::new(PlotKind::Bubble)).map_err(data)?);
    }
    figures.push(render_count_bars(
        &set,
        &all_features,
        &PlotSpec::new(PlotKind::CountBar),
    ));
    figures.push(render_network(&network, &PlotSpec::new(PlotKind::Network)));
    figures.push(render_forest(&top, &PlotSpec::new(PlotKind::Forest)));
    for fig in &figures {
        if !fig.warnings.is_empty() {
            warn!(
                "{}: {} warnings, listed in its sidecar",
                fig.kind.file_stem(),
                fig.warnings.len()
            );
        }
        for w in &fig.warnings {
            debug!("{}: {w}", fig.kind.file_stem());
        }
    }
    let report = RenderedReport {
        figures,
        tables: vec![
            ("associations.csv".into(), associations_table(&set)),
            ("summary_table1.csv".into(), summary_table1(&view)),
        ],
    };
    let written = report.write(&config.out_dir).map_err(internal)?;
    info!("wrote {} report files", written.len());
    Ok(written)
}

/// extract (when masks are configured) or simulate (when no inputs are
/// configured), then analyze and report.
pub fn all(config: &RunConfig) -> Result<RunManifest, CliError> {
    let mut config = config.clone();
    if config.masks_dir.is_some() {
        config.fundus_csv = Some(extract(&config)?);
        if config.lipid_csv.is_none() {
            return Err(CliError::Usage(
                "lipid_csv must be set when extracting from masks".into(),
            ));
        }
    } else if config.fundus_csv.is_none() && config.lipid_csv.is_none() {
        let files = simulate(&config)?;
        config.fundus_csv = Some(files.fundus);
        config.lipid_csv = Some(files.lipids);
    }
    let manifest = analyze(&config)?;
    report(&config)?;
    Ok(manifest)
}
