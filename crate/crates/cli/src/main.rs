use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use oculolipid_cli::commands::{self, CliError};
use oculolipid_cli::config::{parse_override, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "oculolipid",
    version,
    about = "Retinal vessel morphometry and plasma lipid association analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// FDR level.
    #[arg(long, global = true)]
    q: Option<f64>,
    /// `global` or `per_feature`.
    #[arg(long = "fdr-scope", global = true)]
    fdr_scope: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set r_min=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute fundus features from a directory of vessel masks.
    Extract {
        #[arg(long)]
        masks: Option<PathBuf>,
    },
    /// Merge inputs, profile demographics and run the association sweep.
    Analyze {
        #[arg(long)]
        fundus: Option<PathBuf>,
        #[arg(long)]
        lipids: Option<PathBuf>,
    },
    /// Render figures and tables from the analysis outputs.
    Report,
    /// Generate a synthetic cohort with planted associations.
    Simulate {
        /// Participants to simulate.
        #[arg(long)]
        n: Option<usize>,
        /// Planted-effect spec (TOML or JSON).
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Run every stage end to end.
    All {
        #[arg(long)]
        masks: Option<PathBuf>,
        #[arg(long)]
        fundus: Option<PathBuf>,
        #[arg(long)]
        lipids: Option<PathBuf>,
    },
}

fn path_value(p: &Path) -> toml::Value {
    toml::Value::String(p.to_string_lossy().into_owned())
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let g = &cli.global;
    let mut overrides = Vec::new();
    for s in &g.set {
        overrides.push(parse_override(s).map_err(|e| CliError::Usage(e.to_string()))?);
    }
    let mut put = |k: &str, v: toml::Value| overrides.push((k.to_string(), v));
    if let Some(j) = g.jobs {
        put("jobs", toml::Value::Integer(j as i64));
    }
    if let Some(s) = g.seed {
        let s = i64::try_from(s).map_err(|_| CliError::Usage("seed is too large".into()))?;
        put("seed", toml::Value::Integer(s));
    }
    if let Some(q) = g.q {
        put("q", toml::Value::Float(q));
    }
    if let Some(s) = &g.fdr_scope {
        put("fdr_scope", toml::Value::String(s.clone()));
    }
    if let Some(o) = &g.out {
        put("out_dir", path_value(o));
    }
    match &cli.command {
        Command::Extract { masks } => {
            if let Some(m) = masks {
                put("masks_dir", path_value(m));
            }
        }
        Command::Analyze { fundus, lipids } => {
            if let Some(f) = fundus {
                put("fundus_csv", path_value(f));
            }
            if let Some(l) = lipids {
                put("lipid_csv", path_value(l));
            }
        }
        Command::Simulate { n, spec } => {
            if let Some(n) = n {
                put("simulate_n", toml::Value::Integer(*n as i64));
            }
            if let Some(s) = spec {
                put("simulate_spec", path_value(s));
            }
        }
        Command::All { masks, fundus, lipids } => {
            for (key, v) in [("masks_dir", masks), ("fundus_csv", fundus), ("lipid_csv", lipids)] {
                if let Some(p) = v {
                    put(key, path_value(p));
                }
            }
        }
        Command::Report => {}
    }
    RunConfig::load(g.config.as_deref(), &overrides).map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = build_config(&cli)?;
    if let Some(jobs) = config.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Extract { .. } => commands::extract(&config).map(drop),
        Command::Simulate { .. } => commands::simulate(&config).map(drop),
        Command::Analyze { .. } => commands::analyze(&config).map(drop),
        Command::Report => commands::report(&config).map(drop),
        Command::All { .. } => commands::all(&config).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OCULOLIPID_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => {
            error!("internal error");
            ExitCode::from(3)
        }
    }
}
