//! Parameter sweeps, age-vs-rate curves, scalarized search and
//! analytic-vs-simulation validation.
//!
//! Every simulated point in one call shares the settings' seed, so points are
//! compared on common random numbers and results do not depend on scheduling.

mod validate;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use validate::{validate, ValidationReport, ValidationRow, Verdict};

use crate::analytic;
use crate::distributions::{ArrivalProcess, DistFamily, ServiceDistribution};
use crate::error::{Error, Result};
use crate::sim::{self, PolicyConfig, Preemption, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub horizon: f64,
    pub warmup: f64,
    pub reps: u32,
    pub seed: u64,
    /// Monte Carlo paths for the infinite-server min-term.
    pub mc_paths: u64,
    /// Horizon doublings used to label heavy-tailed delay estimates.
    pub convergence_doublings: u32,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            horizon: 2e6,
            warmup: 2e5,
            reps: 8,
            seed: 1,
            mc_paths: analytic::DEFAULT_MC_PATHS,
            convergence_doublings: 2,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("sim.horizon", "must be positive and finite"));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.horizon) {
            return Err(Error::invalid("sim.warmup", "must satisfy 0 <= warmup < horizon"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("sim.reps", "need at least one replication"));
        }
        if self.mc_paths == 0 {
            return Err(Error::invalid("sim.mc_paths", "need at least one path"));
        }
        Ok(())
    }

    pub fn sim_config(&self, arrival: ArrivalProcess, service: ServiceDistribution, policy: PolicyConfig) -> SimConfig {
        SimConfig {
            arrival,
            service,
            policy,
            horizon: self.horizon,
            warmup: self.warmup,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Simulated,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Simulated => "simulated",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// Delay statistics moved by more than 5% under horizon doubling.
    NonConvergent,
    /// Load at or above one; delay values are absent.
    Unstable,
    Failed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::NonConvergent => "non_convergent",
            PointStatus::Unstable => "unstable",
            PointStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for PointStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One (policy, service law) point of an age-delay tradeoff.
///
/// Analytic LCFSp delay uses the M/G/1 formula and analytic delay variance is
/// the `Var(S)` floor. Infinite-server analytic ages come from the Monte Carlo
/// min-term, so they carry a standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub policy: PolicyConfig,
    pub dist: ServiceDistribution,
    pub lambda: f64,
    pub avg_age: Option<f64>,
    pub age_stderr: Option<f64>,
    pub avg_delay: Option<f64>,
    pub delay_stderr: Option<f64>,
    pub delay_var: Option<f64>,
    pub source: Source,
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub status: PointStatus,
    pub message: Option<String>,
}

impl TradeoffPoint {
    fn empty(arrival: &ArrivalProcess, dist: ServiceDistribution, policy: PolicyConfig, source: Source) -> Self {
        Self {
            policy,
            dist,
            lambda: arrival.lambda(),
            avg_age: None,
            age_stderr: None,
            avg_delay: None,
            delay_stderr: None,
            delay_var: None,
            source,
            seed: None,
            horizon: None,
            status: PointStatus::Ok,
            message: None,
        }
    }

    /// A row recording that no value could be produced.
    pub fn failed(
        arrival: &ArrivalProcess,
        dist: ServiceDistribution,
        policy: PolicyConfig,
        source: Source,
        message: impl Into<String>,
    ) -> Self {
        let mut p = Self::empty(arrival, dist, policy, source);
        p.status = PointStatus::Failed;
        p.message = Some(message.into());
        p
    }

    fn fail(mut self, err: &Error) -> Self {
        self.status = match err {
            Error::Unstable { .. } => PointStatus::Unstable,
            _ => PointStatus::Failed,
        };
        self.message = Some(err.to_string());
        self
    }
}

/// Whether closed-form (or semi-analytic) values exist for this policy.
pub fn has_analytic(policy: &PolicyConfig) -> bool {
    matches!(policy, PolicyConfig::LcfspSingle { .. } | PolicyConfig::InfiniteServer)
}

/// Analytic point, or `None` when the policy has no formulas.
pub fn analytic_point(
    arrival: &ArrivalProcess,
    dist: &ServiceDistribution,
    policy: &PolicyConfig,
    settings: &SimSettings,
) -> Option<TradeoffPoint> {
    let mut point = TradeoffPoint::empty(arrival, *dist, *policy, Source::Analytic);
    match policy {
        PolicyConfig::LcfspSingle { preemption } => {
            match analytic::lcfsp_age(arrival, dist) {
                Ok(a) => point.avg_age = Some(a),
                Err(e) => return Some(point.fail(&e)),
            }
            if *preemption == Preemption::Resume && arrival.is_poisson() {
                match analytic::mg1_lcfsp_delay(arrival, dist) {
                    Ok(d) => {
                        point.avg_delay = Some(d);
                        point.delay_var = Some(dist.variance());
                    }
                    Err(e) => return Some(point.fail(&e)),
                }
            }
        }
        PolicyConfig::InfiniteServer => {
            match analytic::gginf_age(arrival, dist, settings.mc_paths, settings.seed) {
                Ok((a, est)) => {
                    point.avg_age = Some(a);
                    point.age_stderr = Some(est.std_error);
                    point.seed = Some(settings.seed);
                }
                Err(e) => return Some(point.fail(&e)),
            }
            point.avg_delay = Some(dist.mean());
            point.delay_var = Some(dist.variance());
        }
        PolicyConfig::FcfsSingle | PolicyConfig::FcfsPool { .. } => return None,
    }
    Some(point)
}

/// Simulated point. Service laws without a finite second moment get a
/// horizon-doubling check and are labelled non-convergent when it fails.
pub fn simulated_point(
    arrival: &ArrivalProcess,
    dist: &ServiceDistribution,
    policy: &PolicyConfig,
    settings: &SimSettings,
) -> TradeoffPoint {
    let mut point = TradeoffPoint::empty(arrival, *dist, *policy, Source::Simulated);
    point.seed = Some(settings.seed);
    point.horizon = Some(settings.horizon);
    let config = settings.sim_config(*arrival, *dist, *policy);
    let outcome = if dist.second_moment().is_infinite() && settings.convergence_doublings > 0 {
        sim::horizon_doubling_check(&config, settings.reps, settings.seed, settings.convergence_doublings)
            .map(|c| (c.base.clone(), c.converged))
    } else {
        sim::run_replications(&config, settings.reps, settings.seed).map(|r| (r, true))
    };
    match outcome {
        Ok((r, converged)) => {
            point.avg_age = Some(r.avg_age);
            point.age_stderr = Some(r.age_stderr);
            if r.delay_stats.count() > 0 {
                point.avg_delay = Some(r.avg_delay);
                point.delay_stderr = Some(r.delay_stderr);
                point.delay_var = Some(r.delay_var);
            }
            if !converged {
                point.status = PointStatus::NonConvergent;
            }
            point
        }
        Err(e) => point.fail(&e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub arrival: ArrivalProcess,
    pub families: Vec<DistFamily>,
    pub policies: Vec<PolicyConfig>,
    pub settings: SimSettings,
    /// Also simulate policies that have analytic values.
    pub simulate: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        if self.families.is_empty() {
            return Err(Error::invalid("family", "need at least one distribution family"));
        }
        if self.policies.is_empty() {
            return Err(Error::invalid("policies", "need at least one policy"));
        }
        for p in &self.policies {
            p.validate()?;
        }
        Ok(())
    }
}

/// Analytic points where formulas exist plus simulated points where they do
/// not (or for every point when `simulate` is set), sorted by age descending.
/// Points without an age keep their relative order at the end.
pub fn tradeoff_sweep(spec: &SweepSpec) -> Result<Vec<TradeoffPoint>> {
    spec.validate()?;
    let mut tasks = Vec::new();
    for policy in &spec.policies {
        for family in &spec.families {
            for dist in family.members() {
                if has_analytic(policy) {
                    tasks.push((*policy, dist, Source::Analytic));
                }
                if spec.simulate || !has_analytic(policy) {
                    tasks.push((*policy, dist, Source::Simulated));
                }
            }
        }
    }
    let mut points: Vec<TradeoffPoint> = tasks
        .par_iter()
        .map(|(policy, dist, source)| match source {
            Source::Analytic => analytic_point(&spec.arrival, dist, policy, &spec.settings)
                .expect("analytic tasks are only queued for policies with formulas"),
            Source::Simulated => simulated_point(&spec.arrival, dist, policy, &spec.settings),
        })
        .collect();
    sort_by_age_desc(&mut points);
    Ok(points)
}

fn sort_by_age_desc(points: &mut [TradeoffPoint]) {
    points.sort_by(|a, b| match (a.avg_age, b.avg_age) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
}

/// Analytic if the policy has formulas, simulated otherwise.
pub fn best_point(
    arrival: &ArrivalProcess,
    dist: &ServiceDistribution,
    policy: &PolicyConfig,
    settings: &SimSettings,
) -> TradeoffPoint {
    analytic_point(arrival, dist, policy, settings).unwrap_or_else(|| simulated_point(arrival, dist, policy, settings))
}

/// One row of an age-vs-generation-rate table under Poisson generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub lambda: f64,
    pub point: TradeoffPoint,
    /// The age floor `1/lambda`.
    pub bound: f64,
}

pub fn age_vs_rate_curves(
    families: &[DistFamily],
    lambdas: &[f64],
    policy: &PolicyConfig,
    settings: &SimSettings,
) -> Result<Vec<CurveRow>> {
    settings.validate()?;
    policy.validate()?;
    if lambdas.is_empty() {
        return Err(Error::invalid("lambdas", "need at least one generation rate"));
    }
    let arrivals = lambdas
        .iter()
        .map(|&l| {
            ArrivalProcess::poisson(l)
                .map_err(|_| Error::invalid("lambdas", format!("rate {l} must be positive and finite")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tasks = Vec::new();
    for arrival in &arrivals {
        for family in families {
            if let Some(m) = policy.servers().filter(|_| policy.is_fcfs()) {
                if arrival.lambda() >= f64::from(m) * family.mu() {
                    return Err(Error::invalid(
                        "lambdas",
                        format!(
                            "rate {} makes {} unstable at mu = {}",
                            arrival.lambda(),
                            policy,
                            family.mu()
                        ),
                    ));
                }
            }
            for dist in family.members() {
                tasks.push((*arrival, dist));
            }
        }
    }
    Ok(tasks
        .par_iter()
        .map(|(arrival, dist)| CurveRow {
            lambda: arrival.lambda(),
            point: best_point(arrival, dist, policy, settings),
            bound: analytic::a_min(arrival),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    Delay,
    DelayVariance,
}

impl Objective {
    pub fn metric(self, point: &TradeoffPoint) -> Option<f64> {
        match self {
            Objective::Delay => point.avg_delay,
            Objective::DelayVariance => point.delay_var,
        }
    }
}

/// Scored candidate from [`scalarized_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarizedResult {
    pub best: TradeoffPoint,
    pub objective_value: f64,
    /// `(shape, objective)` for every grid point in grid order; `None` when unavailable.
    pub scores: Vec<(Option<f64>, Option<f64>)>,
}

/// Grid search minimizing `metric + nu * avg_age` over a family.
/// With `nu = 0` the age is ignored entirely. Ties go to the earlier (lighter
/// tailed) grid point.
pub fn scalarized_search(
    arrival: &ArrivalProcess,
    family: &DistFamily,
    nu: f64,
    policy: &PolicyConfig,
    objective: Objective,
    settings: &SimSettings,
) -> Result<ScalarizedResult> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::invalid("nu", "must be a nonnegative finite weight"));
    }
    settings.validate()?;
    policy.validate()?;
    let points: Vec<TradeoffPoint> = family
        .members()
        .par_iter()
        .map(|d| best_point(arrival, d, policy, settings))
        .collect();
    let score = |p: &TradeoffPoint| -> Option<f64> {
        let metric = objective.metric(p)?;
        let value = if nu == 0.0 { metric } else { metric + nu * p.avg_age? };
        value.is_finite().then_some(value)
    };
    let scores: Vec<_> = points.iter().map(|p| (p.dist.shape(), score(p))).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, (_, s)) in scores.iter().enumerate() {
        if let Some(v) = *s {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    let (i, objective_value) = best.ok_or(Error::NoFinitePoint)?;
    Ok(ScalarizedResult {
        best: points[i].clone(),
        objective_value,
        scores,
    })
}
