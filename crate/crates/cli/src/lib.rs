//! Command-line front end: config parsing, experiment dispatch and output.
//!
//! Exit codes: 0 success, 2 config or flag errors, 3 runtime errors, 4 a
//! validation report with failing rows.

pub mod config;
pub mod output;

use std::path::PathBuf;

use aoi_core::experiments::{self, Source, SweepSpec, TradeoffPoint};
use aoi_core::sim;
use clap::Parser;
use log::info;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Command, ExperimentConfig, Overrides};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Runtime(#[from] aoi_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::ConfigRead { .. } => EXIT_PARSE,
            CliError::Io { .. } | CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "aoi-lab",
    version,
    about = "Age-of-information and delay experiments for update systems"
)]
pub struct Args {
    /// JSON experiment config.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Overrides `sim.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `sim.horizon`. Warmup keeps the file's warmup/horizon ratio, or 10%.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Overrides `sim.reps`.
    #[arg(long)]
    pub reps: Option<u32>,
    /// Output path; `-` for stdout. Defaults to `output` in the config, then
    /// `$AOI_LAB_OUT_DIR/<command>.<ext>`, then stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            horizon: self.horizon,
            reps: self.reps,
            out: self.out.clone(),
        }
    }
}

/// Result of one command: the text to emit and whether it counts as success.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub passed: bool,
}

fn per_point<F>(config: &ExperimentConfig, f: F) -> Vec<TradeoffPoint>
where
    F: Fn(&aoi_core::ServiceDistribution, &sim::PolicyConfig) -> TradeoffPoint + Sync,
{
    let tasks: Vec<_> = config
        .policies
        .iter()
        .flat_map(|p| {
            config
                .families
                .iter()
                .flat_map(move |fam| fam.members().into_iter().map(move |d| (*p, d)))
        })
        .collect();
    tasks.par_iter().map(|(p, d)| f(d, p)).collect()
}

/// Runs the configured command and renders its output.
pub fn execute(config: &ExperimentConfig) -> Result<Report, CliError> {
    let arrival = &config.arrival;
    let settings = &config.settings;
    let ok = |body: String| Ok(Report { body, passed: true });
    match config.command {
        Command::Analytic => {
            let points = per_point(config, |d, p| {
                experiments::analytic_point(arrival, d, p, settings).unwrap_or_else(|| {
                    TradeoffPoint::failed(arrival, *d, *p, Source::Analytic, format!("no analytic values for {p}"))
                })
            });
            ok(output::tradeoff_csv(&points))
        }
        Command::Sim => {
            let points = per_point(config, |d, p| experiments::simulated_point(arrival, d, p, settings));
            ok(output::tradeoff_csv(&points))
        }
        Command::Sweep => {
            let spec = SweepSpec {
                arrival: *arrival,
                families: config.families.clone(),
                policies: config.policies.clone(),
                settings: *settings,
                simulate: config.simulate,
            };
            ok(output::tradeoff_csv(&experiments::tradeoff_sweep(&spec)?))
        }
        Command::Curves => {
            let mut rows = Vec::new();
            for p in &config.policies {
                rows.extend(experiments::age_vs_rate_curves(
                    &config.families,
                    &config.lambdas,
                    p,
                    settings,
                )?);
            }
            ok(output::curves_csv(&rows))
        }
        Command::Scalarize => {
            let result = experiments::scalarized_search(
                arrival,
                &config.families[0],
                config.nu,
                &config.policy(),
                config.objective,
                settings,
            )?;
            info!("objective {} at {}", result.objective_value, result.best.dist);
            ok(output::tradeoff_csv(std::slice::from_ref(&result.best)))
        }
        Command::Validate => {
            let report = experiments::validate(arrival, &config.service(), &config.policy(), settings);
            Ok(Report {
                body: report.render_text(),
                passed: report.passed(),
            })
        }
        Command::Trace => {
            let sim_config = settings.sim_config(*arrival, config.service(), config.policy());
            let trace = sim::age_trace(&sim_config, settings.seed, config.sample_points)?;
            ok(output::trace_csv(&trace))
        }
    }
}

/// Path of the echoed config for an output file: `<out>.config.json`.
pub fn config_echo_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".config.json");
    PathBuf::from(s)
}

/// Writes the report to the configured output (plus the resolved config next
/// to it) or to stdout.
pub fn emit(config: &ExperimentConfig, report: &Report) -> Result<(), CliError> {
    match config.output.as_deref().filter(|p| p.as_os_str() != "-") {
        Some(path) => {
            output::write_file(path, &report.body)?;
            output::write_file(&config_echo_path(path), &(config.resolved_json() + "\n"))?;
            info!("wrote {}", path.display());
        }
        None => print!("{}", report.body),
    }
    Ok(())
}

/// Full pipeline for parsed arguments; returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let result = config::load_file(&args.config, &args.overrides()).and_then(|cfg| {
        let report = execute(&cfg)?;
        emit(&cfg, &report)?;
        Ok(report.passed)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VALIDATION,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
