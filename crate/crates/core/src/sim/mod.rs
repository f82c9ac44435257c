//! Seedable discrete-event simulator of the update system.
//!
//! One run is single-threaded and consumes one random stream in event order:
//! the first inter-generation gap, then for every generated packet its service
//! requirement followed by the next gap. Replications run in parallel, each on
//! its own stream, and are merged in replication order.

mod age;
mod engine;
mod recursion;

use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use age::{downsample, trace_area, AgeIntegrator};
pub use engine::EVENT_BUDGET;
pub use recursion::lcfsp_recursion_age;

use crate::distributions::{ArrivalProcess, ServiceDistribution};
use crate::draws::{DrawSource, RandomDraws};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::stats::RunningStats;

/// What happens to the packet in service when a newer one preempts it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preemption {
    /// Keeps its remaining work and waits on a LIFO stack until the server idles.
    #[default]
    Resume,
    /// Loses its completed work and starts over when resumed.
    Restart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyConfig {
    LcfspSingle {
        #[serde(default)]
        preemption: Preemption,
    },
    FcfsSingle,
    /// `servers` identical servers fed from one FCFS queue.
    FcfsPool {
        servers: u32,
    },
    /// Every packet gets its own server.
    InfiniteServer,
}

impl PolicyConfig {
    pub fn lcfsp() -> Self {
        PolicyConfig::LcfspSingle {
            preemption: Preemption::Resume,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PolicyConfig::FcfsPool { servers: 0 } => Err(Error::invalid("policy.servers", "need at least one server")),
            _ => Ok(()),
        }
    }

    /// Servers available, `None` for the infinite-server system.
    pub fn servers(&self) -> Option<u32> {
        match self {
            PolicyConfig::LcfspSingle { .. } | PolicyConfig::FcfsSingle => Some(1),
            PolicyConfig::FcfsPool { servers } => Some(*servers),
            PolicyConfig::InfiniteServer => None,
        }
    }

    pub fn is_fcfs(&self) -> bool {
        matches!(self, PolicyConfig::FcfsSingle | PolicyConfig::FcfsPool { .. })
    }

    /// Short name used in tables: `lcfsp`, `lcfsp_restart`, `fcfs`, `fcfs_pool(M)`, `infinite`.
    pub fn label(&self) -> String {
        match self {
            PolicyConfig::LcfspSingle {
                preemption: Preemption::Resume,
            } => "lcfsp".into(),
            PolicyConfig::LcfspSingle {
                preemption: Preemption::Restart,
            } => "lcfsp_restart".into(),
            PolicyConfig::FcfsSingle => "fcfs".into(),
            PolicyConfig::FcfsPool { servers } => format!("fcfs_pool({servers})"),
            PolicyConfig::InfiniteServer => "infinite".into(),
        }
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PolicyConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let policy = match s.as_str() {
            "lcfsp" | "lcfsp_resume" | "lcfs" => PolicyConfig::lcfsp(),
            "lcfsp_restart" => PolicyConfig::LcfspSingle {
                preemption: Preemption::Restart,
            },
            "fcfs" | "fcfs_single" => PolicyConfig::FcfsSingle,
            "infinite" | "infinite_server" | "gginf" => PolicyConfig::InfiniteServer,
            other => {
                let servers = other
                    .strip_prefix("fcfs_pool(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| Error::invalid("policy", format!("unknown policy `{other}`")))?;
                PolicyConfig::FcfsPool { servers }
            }
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub arrival: ArrivalProcess,
    pub service: ServiceDistribution,
    pub policy: PolicyConfig,
    pub horizon: f64,
    pub warmup: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be positive and finite"));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.horizon) {
            return Err(Error::invalid("warmup", "must satisfy 0 <= warmup < horizon"));
        }
        Ok(())
    }

    /// Offered load per server; 0 for the infinite-server system.
    pub fn load(&self) -> f64 {
        match self.policy.servers() {
            Some(m) => self.arrival.lambda() / (m as f64 * self.service.mu()),
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub avg_age: f64,
    /// Mean delay of packets received in `[warmup, horizon]`; NaN if there were none.
    pub avg_delay: f64,
    pub delay_var: f64,
    pub n_delivered: u64,
    pub n_informative: u64,
    pub n_generated: u64,
    pub n_in_system: u64,
    /// Standard errors across replications; 0 for a single run.
    pub age_stderr: f64,
    pub delay_stderr: f64,
    pub horizon: f64,
    pub warmup: f64,
    pub seed: u64,
    pub replications: u32,
    pub delay_stats: RunningStats,
}

fn raw_to_result(horizon: f64, warmup: f64, seed: u64, raw: &engine::RawOutcome) -> SimResult {
    SimResult {
        avg_age: raw.area / (horizon - warmup),
        avg_delay: if raw.delays.count() > 0 {
            raw.delays.mean()
        } else {
            f64::NAN
        },
        delay_var: raw.delays.variance(),
        n_delivered: raw.n_delivered,
        n_informative: raw.n_informative,
        n_generated: raw.n_generated,
        n_in_system: raw.n_in_system,
        age_stderr: 0.0,
        delay_stderr: 0.0,
        horizon,
        warmup,
        seed,
        replications: 1,
        delay_stats: raw.delays,
    }
}

fn warn_if_unstable(config: &SimConfig) {
    if config.policy.is_fcfs() && config.load() >= 1.0 {
        warn!(
            "{} with load {:.3} >= 1 is unstable; delays grow with the horizon",
            config.policy,
            config.load()
        );
    }
}

/// Runs one replication on random stream 0 of `seed`.
pub fn run(config: &SimConfig, seed: u64) -> Result<SimResult> {
    run_stream(config, seed, 0)
}

fn run_stream(config: &SimConfig, seed: u64, stream: u64) -> Result<SimResult> {
    config.validate()?;
    warn_if_unstable(config);
    let draws = RandomDraws::new(&config.arrival, &config.service, stream_rng(seed, stream));
    let raw = engine::simulate(&config.policy, config.horizon, config.warmup, draws, false)?;
    Ok(raw_to_result(config.horizon, config.warmup, seed, &raw))
}

/// Runs the event loop on caller-supplied draws. Useful for replaying fixed
/// schedules and for feeding the same stream to another computation.
pub fn run_with_draws<D: DrawSource>(
    policy: &PolicyConfig,
    horizon: f64,
    warmup: f64,
    draws: D,
) -> Result<(SimResult, Vec<(f64, f64)>)> {
    policy.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", "must be positive and finite"));
    }
    if !(warmup >= 0.0 && warmup < horizon) {
        return Err(Error::invalid("warmup", "must satisfy 0 <= warmup < horizon"));
    }
    let raw = engine::simulate(policy, horizon, warmup, draws, true)?;
    Ok((raw_to_result(horizon, warmup, 0, &raw), raw.trace.unwrap_or_default()))
}

/// Runs `n_reps` replications on streams `0..n_reps` of `base_seed` and
/// aggregates: the age is the mean of replication ages, delay statistics are
/// pooled over all recorded packets, and standard errors are across replications.
pub fn run_replications(config: &SimConfig, n_reps: u32, base_seed: u64) -> Result<SimResult> {
    if n_reps == 0 {
        return Err(Error::invalid("reps", "need at least one replication"));
    }
    config.validate()?;
    if n_reps == 1 {
        return run(config, base_seed);
    }
    let results: Vec<SimResult> = (0..n_reps)
        .into_par_iter()
        .map(|i| {
            run_stream(config, base_seed, u64::from(i)).map_err(|e| Error::Replication {
                seed: base_seed,
                replication: u64::from(i),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let ages: RunningStats = results.iter().map(|r| r.avg_age).collect();
    let rep_delays: RunningStats = results
        .iter()
        .filter(|r| r.delay_stats.count() > 0)
        .map(|r| r.avg_delay)
        .collect();
    let mut pooled = RunningStats::new();
    for r in &results {
        pooled.merge(&r.delay_stats);
    }
    Ok(SimResult {
        avg_age: ages.mean(),
        avg_delay: if pooled.count() > 0 { pooled.mean() } else { f64::NAN },
        delay_var: pooled.variance(),
        n_delivered: results.iter().map(|r| r.n_delivered).sum(),
        n_informative: results.iter().map(|r| r.n_informative).sum(),
        n_generated: results.iter().map(|r| r.n_generated).sum(),
        n_in_system: results.iter().map(|r| r.n_in_system).sum(),
        age_stderr: ages.std_error(),
        delay_stderr: rep_delays.std_error(),
        horizon: config.horizon,
        warmup: config.warmup,
        seed: base_seed,
        replications: n_reps,
        delay_stats: pooled,
    })
}

/// Relative change between successive horizon doublings above which an
/// estimate is labelled non-convergent.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCheck {
    /// `(horizon, avg_delay, delay_var)` for each doubling.
    pub estimates: Vec<(f64, f64, f64)>,
    /// Largest relative change between successive mean-delay estimates.
    pub delay_change: f64,
    /// Largest relative change between successive delay-variance estimates.
    pub variance_change: f64,
    pub converged: bool,
    /// Result at the original horizon.
    pub base: SimResult,
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if !(a.is_finite() && b.is_finite()) || a == 0.0 {
        f64::INFINITY
    } else {
        ((b - a) / a).abs()
    }
}

/// Reruns `config` at `doublings + 1` horizons `h, 2h, 4h, ...` (warmup scaled
/// alongside) and flags the delay estimates as non-convergent when any
/// successive pair of mean delays or delay variances differs by more than 5%.
pub fn horizon_doubling_check(config: &SimConfig, n_reps: u32, seed: u64, doublings: u32) -> Result<ConvergenceCheck> {
    let mut estimates = Vec::with_capacity(doublings as usize + 1);
    let mut base = None;
    for k in 0..=doublings {
        let scale = f64::from(1u32 << k);
        let scaled = SimConfig {
            horizon: config.horizon * scale,
            warmup: config.warmup * scale,
            ..*config
        };
        let r = run_replications(&scaled, n_reps, seed)?;
        estimates.push((scaled.horizon, r.avg_delay, r.delay_var));
        base.get_or_insert(r);
    }
    let max_change = |pick: fn(&(f64, f64, f64)) -> f64| {
        estimates
            .windows(2)
            .map(|w| relative_change(pick(&w[0]), pick(&w[1])))
            .fold(0.0, f64::max)
    };
    let delay_change = max_change(|e| e.1);
    let variance_change = max_change(|e| e.2);
    Ok(ConvergenceCheck {
        converged: delay_change <= CONVERGENCE_TOLERANCE && variance_change <= CONVERGENCE_TOLERANCE,
        delay_change,
        variance_change,
        estimates,
        base: base.expect("at least one horizon is run"),
    })
}

/// Exact age breakpoints `(t, A(t))` over `[warmup, horizon]` for one run on
/// stream 0 of `seed`, downsampled to at most `sample_points`.
pub fn age_trace(config: &SimConfig, seed: u64, sample_points: usize) -> Result<Vec<(f64, f64)>> {
    Ok(downsample(&full_age_trace(config, seed)?.1, sample_points))
}

/// The run's result together with its full, un-downsampled age trace.
pub fn full_age_trace(config: &SimConfig, seed: u64) -> Result<(SimResult, Vec<(f64, f64)>)> {
    config.validate()?;
    let draws = RandomDraws::new(&config.arrival, &config.service, stream_rng(seed, 0));
    let raw = engine::simulate(&config.policy, config.horizon, config.warmup, draws, true)?;
    let result = raw_to_result(config.horizon, config.warmup, seed, &raw);
    Ok((result, raw.trace.unwrap_or_default()))
}
