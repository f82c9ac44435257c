//! Experiment configuration: JSON schema, flag overrides and resolution.
//!
//! A config is parsed into [`RawConfig`] (unknown keys rejected, errors carry
//! the JSON path), overridden by flags, then resolved into core types. The
//! resolved form is serialized back with every default filled in, so it can be
//! fed to the tool again to reproduce a run.

use std::fmt;
use std::path::{Path, PathBuf};

use aoi_core::distributions::DistributionSpec;
use aoi_core::experiments::{Objective, SimSettings};
use aoi_core::sim::{PolicyConfig, Preemption};
use aoi_core::{ArrivalProcess, DistFamily, DistKind, Error as CoreError, ServiceDistribution};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the directory for outputs when no path is given.
pub const OUT_DIR_ENV: &str = "AOI_LAB_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Closed-form and semi-analytic values only.
    Analytic,
    /// Simulation only.
    Sim,
    /// Tradeoff points over families and policies.
    Sweep,
    /// Age against generation rate.
    Curves,
    /// Grid search on delay (or delay variance) plus weighted age.
    Scalarize,
    /// Analytic against simulated values with pass/fail verdicts.
    Validate,
    /// Age sample path as `t,age` rows.
    Trace,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Sim => "sim",
            Command::Sweep => "sweep",
            Command::Curves => "curves",
            Command::Scalarize => "scalarize",
            Command::Validate => "validate",
            Command::Trace => "trace",
        }
    }

    fn default_extension(self) -> &'static str {
        match self {
            Command::Validate => "txt",
            _ => "csv",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inter-generation law: `poisson`, `periodic`, or any service kind at rate `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawArrival {
    pub kind: String,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFamily {
    pub kind: DistKind,
    pub mu: f64,
    #[serde(default)]
    pub grid: Vec<f64>,
}

/// `"lcfsp"`-style name or `{kind, preemption?, servers?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawPolicy {
    Name(String),
    Spec(PolicySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preemption: Option<Preemption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub servers: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSim {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_paths: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_doublings: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Command,
    pub arrival: RawArrival,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<RawFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<RawFamily>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<RawPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<RawPolicy>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<RawSim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Values given on the command line; each one replaces the file's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub reps: Option<u32>,
    pub out: Option<PathBuf>,
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub arrival: ArrivalProcess,
    /// Service laws to evaluate, one family per entry (single laws become one-member families).
    pub families: Vec<DistFamily>,
    pub policies: Vec<PolicyConfig>,
    pub lambdas: Vec<f64>,
    pub nu: f64,
    pub objective: Objective,
    pub simulate: bool,
    pub sample_points: usize,
    pub settings: SimSettings,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
    /// The resolved config in file form, with all defaults materialized.
    pub resolved: RawConfig,
}

pub const DEFAULT_SAMPLE_POINTS: usize = 10_000;

impl ExperimentConfig {
    /// The only service law of a single-law command.
    pub fn service(&self) -> ServiceDistribution {
        self.families[0].members()[0]
    }

    pub fn policy(&self) -> PolicyConfig {
        self.policies[0]
    }

    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(&self.resolved).expect("config types serialize")
    }
}

fn parse_error(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Parse {
        field: field.into(),
        message: message.into(),
    }
}

/// Re-anchors a core validation error under `prefix` (`shape` becomes `service.shape`).
fn core_error(prefix: &str, err: CoreError) -> CliError {
    match err {
        CoreError::InvalidParameter { field, reason } => parse_error(format!("{prefix}.{field}"), reason),
        other => parse_error(prefix, other.to_string()),
    }
}

pub fn parse_str(text: &str) -> Result<RawConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "config".to_string() } else { path };
        parse_error(field, e.into_inner().to_string())
    })
}

pub fn parse_file(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigRead {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_str(&text)
}

fn resolve_arrival(raw: &RawArrival) -> Result<ArrivalProcess, CliError> {
    let kind = raw.kind.trim().to_ascii_lowercase();
    let arrival = match kind.as_str() {
        "poisson" | "exponential" => {
            if raw.shape.is_some() {
                return Err(parse_error("arrival.shape", "poisson arrivals take no shape"));
            }
            ArrivalProcess::poisson(raw.lambda)
        }
        "periodic" | "deterministic" => {
            if raw.shape.is_some() {
                return Err(parse_error("arrival.shape", "periodic arrivals take no shape"));
            }
            ArrivalProcess::periodic(raw.lambda)
        }
        other => {
            let kind: DistKind = other.parse().map_err(|_| {
                parse_error(
                    "arrival.kind",
                    format!(
                        "unknown arrival kind `{other}` (expected poisson, periodic, pareto, lognormal or weibull)"
                    ),
                )
            })?;
            ServiceDistribution::new(kind, raw.lambda, raw.shape)
                .map(ArrivalProcess::new)
                .map_err(|e| match e {
                    CoreError::InvalidParameter { field, reason } if field == "mu" => CoreError::InvalidParameter {
                        field: "lambda".into(),
                        reason,
                    },
                    e => e,
                })
        }
    };
    arrival.map_err(|e| core_error("arrival", e))
}

fn resolve_family(prefix: &str, raw: &RawFamily) -> Result<DistFamily, CliError> {
    DistFamily::new(raw.kind, raw.mu, raw.grid.clone()).map_err(|e| core_error(prefix, e))
}

fn resolve_policy(prefix: &str, raw: &RawPolicy) -> Result<PolicyConfig, CliError> {
    let policy = match raw {
        RawPolicy::Name(name) => name.parse::<PolicyConfig>(),
        RawPolicy::Spec(spec) => {
            let kind = spec.kind.trim().to_ascii_lowercase();
            match kind.as_str() {
                "lcfsp" | "lcfsp_single" => {
                    if spec.servers.is_some() {
                        return Err(parse_error(format!("{prefix}.servers"), "lcfsp has a single server"));
                    }
                    Ok(PolicyConfig::LcfspSingle {
                        preemption: spec.preemption.unwrap_or_default(),
                    })
                }
                "fcfs_pool" => {
                    let servers = spec
                        .servers
                        .ok_or_else(|| parse_error(format!("{prefix}.servers"), "fcfs_pool needs `servers`"))?;
                    Ok(PolicyConfig::FcfsPool { servers })
                }
                other if spec.preemption.is_some() => {
                    return Err(parse_error(
                        format!("{prefix}.preemption"),
                        format!("preemption applies to lcfsp only, not `{other}`"),
                    ))
                }
                other if spec.servers.is_some() => {
                    return Err(parse_error(
                        format!("{prefix}.servers"),
                        format!("servers applies to fcfs_pool only, not `{other}`"),
                    ))
                }
                other => other.parse::<PolicyConfig>(),
            }
        }
    };
    let policy = policy.map_err(|e| match e {
        CoreError::InvalidParameter { field, reason } if field == "policy" => parse_error(prefix, reason),
        CoreError::InvalidParameter { field, reason } => {
            parse_error(format!("{prefix}.{}", field.trim_start_matches("policy.")), reason)
        }
        other => parse_error(prefix, other.to_string()),
    })?;
    policy.validate().map_err(|e| core_error(prefix, e))?;
    Ok(policy)
}

fn policy_to_raw(policy: &PolicyConfig) -> RawPolicy {
    match policy {
        PolicyConfig::LcfspSingle { preemption } => RawPolicy::Spec(PolicySpec {
            kind: "lcfsp".into(),
            preemption: Some(*preemption),
            servers: None,
        }),
        PolicyConfig::FcfsPool { servers } => RawPolicy::Spec(PolicySpec {
            kind: "fcfs_pool".into(),
            preemption: None,
            servers: Some(*servers),
        }),
        other => RawPolicy::Name(other.label()),
    }
}

fn family_to_raw(family: &DistFamily) -> RawFamily {
    RawFamily {
        kind: family.kind(),
        mu: family.mu(),
        grid: family.grid().to_vec(),
    }
}

fn resolve_settings(raw: &RawSim, overrides: &Overrides) -> Result<SimSettings, CliError> {
    let d = SimSettings::default();
    let horizon = overrides.horizon.or(raw.horizon).unwrap_or(d.horizon);
    // a file warmup is kept as a fraction of the file horizon when --horizon moves it
    let warmup = match (raw.warmup, raw.horizon, overrides.horizon) {
        (Some(w), Some(h), Some(_)) => w / h * horizon,
        (Some(w), None, Some(_)) => w / d.horizon * horizon,
        (Some(w), _, None) => w,
        (None, _, _) => 0.1 * horizon,
    };
    let settings = SimSettings {
        horizon,
        warmup,
        reps: overrides.reps.or(raw.reps).unwrap_or(d.reps),
        seed: overrides.seed.or(raw.seed).unwrap_or(d.seed),
        mc_paths: raw.mc_paths.unwrap_or(d.mc_paths),
        convergence_doublings: raw.convergence_doublings.unwrap_or(d.convergence_doublings),
    };
    settings.validate().map_err(|e| match e {
        CoreError::InvalidParameter { field, reason } => parse_error(field, reason),
        other => parse_error("sim", other.to_string()),
    })?;
    Ok(settings)
}

fn default_output(command: Command) -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|dir| PathBuf::from(dir).join(format!("{}.{}", command, command.default_extension())))
}

/// Applies flag overrides, fills defaults and validates.
pub fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let command = raw.command;
    let arrival = resolve_arrival(&raw.arrival)?;

    let mut families = Vec::new();
    if let Some(spec) = &raw.service {
        let d = ServiceDistribution::try_from(*spec).map_err(|e| core_error("service", e))?;
        families.push(DistFamily::single(d));
    }
    if let Some(f) = &raw.family {
        families.push(resolve_family("family", f)?);
    }
    for (i, f) in raw.families.iter().flatten().enumerate() {
        families.push(resolve_family(&format!("families[{i}]"), f)?);
    }
    if families.is_empty() {
        return Err(parse_error("service", "need `service`, `family` or `families`"));
    }

    let mut policies = Vec::new();
    if let Some(p) = &raw.policy {
        policies.push(resolve_policy("policy", p)?);
    }
    for (i, p) in raw.policies.iter().flatten().enumerate() {
        policies.push(resolve_policy(&format!("policies[{i}]"), p)?);
    }
    if policies.is_empty() {
        return Err(parse_error("policy", "need `policy` or `policies`"));
    }

    match command {
        Command::Validate | Command::Trace => {
            if families.len() != 1 || families[0].members().len() != 1 {
                return Err(parse_error(
                    "service",
                    format!("`{command}` takes exactly one service law"),
                ));
            }
            if policies.len() != 1 {
                return Err(parse_error("policy", format!("`{command}` takes exactly one policy")));
            }
        }
        Command::Scalarize => {
            if families.len() != 1 {
                return Err(parse_error("family", "`scalarize` takes exactly one family"));
            }
            if policies.len() != 1 {
                return Err(parse_error("policy", "`scalarize` takes exactly one policy"));
            }
        }
        _ => {}
    }

    let lambdas = match (command, &raw.lambdas) {
        (Command::Curves, Some(ls)) if !ls.is_empty() => {
            for (i, &l) in ls.iter().enumerate() {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(parse_error(
                        format!("lambdas[{i}]"),
                        "rates must be positive and finite",
                    ));
                }
            }
            ls.clone()
        }
        (Command::Curves, _) => return Err(parse_error("lambdas", "`curves` needs a nonempty `lambdas` list")),
        (_, Some(_)) => return Err(parse_error("lambdas", format!("`{command}` does not use `lambdas`"))),
        (_, None) => Vec::new(),
    };

    let rates: Vec<f64> = if command == Command::Curves {
        lambdas.clone()
    } else {
        vec![arrival.lambda()]
    };
    for p in policies.iter().filter(|p| p.is_fcfs()) {
        let m = f64::from(p.servers().unwrap_or(1));
        for f in &families {
            for &l in &rates {
                if l >= m * f.mu() {
                    let field = if command == Command::Curves {
                        "lambdas"
                    } else {
                        "arrival.lambda"
                    };
                    return Err(parse_error(
                        field,
                        format!(
                            "{p} needs lambda < servers * mu for stability (lambda {l}, mu {})",
                            f.mu()
                        ),
                    ));
                }
            }
        }
    }

    let nu = raw.nu.unwrap_or(0.0);
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(parse_error("nu", "must be a nonnegative finite weight"));
    }
    let sample_points = raw.sample_points.unwrap_or(DEFAULT_SAMPLE_POINTS);
    if sample_points == 0 {
        return Err(parse_error("sample_points", "must be positive"));
    }
    let settings = resolve_settings(&raw.sim.clone().unwrap_or_default(), overrides)?;
    let objective = raw.objective.unwrap_or_default();
    let simulate = raw.simulate.unwrap_or(false);
    let output = overrides
        .out
        .clone()
        .or(raw.output.clone())
        .or_else(|| default_output(command));

    let resolved = RawConfig {
        command,
        arrival: raw.arrival.clone(),
        service: None,
        family: None,
        families: Some(families.iter().map(family_to_raw).collect()),
        policy: None,
        policies: Some(policies.iter().map(policy_to_raw).collect()),
        lambdas: (command == Command::Curves).then(|| lambdas.clone()),
        nu: Some(nu),
        objective: Some(objective),
        simulate: Some(simulate),
        sample_points: Some(sample_points),
        sim: Some(RawSim {
            horizon: Some(settings.horizon),
            warmup: Some(settings.warmup),
            reps: Some(settings.reps),
            seed: Some(settings.seed),
            mc_paths: Some(settings.mc_paths),
            convergence_doublings: Some(settings.convergence_doublings),
        }),
        output: output.clone(),
    };

    Ok(ExperimentConfig {
        command,
        arrival,
        families,
        policies,
        lambdas,
        nu,
        objective,
        simulate,
        sample_points,
        settings,
        output,
        resolved,
    })
}

/// Parses and resolves config text.
pub fn load_str(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    resolve(parse_str(text)?, overrides)
}

pub fn load_file(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    resolve(parse_file(path)?, overrides)
}
