use std::fmt::{self, Write as _};

use serde::Serialize;

use super::SimSettings;
use crate::analytic;
use crate::distributions::{ArrivalProcess, DistKind, ServiceDistribution};
use crate::sim::{self, PolicyConfig, Preemption};

/// Relative tolerance used when three standard errors are smaller.
pub const RELATIVE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for reference only.
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "info",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub quantity: String,
    pub analytic: f64,
    pub simulated: f64,
    /// Combined standard error of both sides.
    pub stderr: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl ValidationRow {
    fn compare(quantity: &str, analytic: f64, simulated: f64, stderr: f64) -> Self {
        let tolerance = (3.0 * stderr).max(RELATIVE_TOLERANCE * analytic.abs());
        let verdict = if (simulated - analytic).abs() <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            quantity: quantity.into(),
            analytic,
            simulated,
            stderr,
            tolerance,
            verdict,
        }
    }

    fn info(quantity: &str, analytic: f64, simulated: f64) -> Self {
        Self {
            quantity: quantity.into(),
            analytic,
            simulated,
            stderr: f64::NAN,
            tolerance: f64::NAN,
            verdict: Verdict::Info,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub arrival: ArrivalProcess,
    pub service: ServiceDistribution,
    pub policy: PolicyConfig,
    pub settings: SimSettings,
    pub rows: Vec<ValidationRow>,
    /// Problems that prevented a comparison (instability, evaluator errors).
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.notes.is_empty() && self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let arrival = match self.arrival.law().kind() {
            DistKind::Exponential => format!("poisson lambda={}", self.arrival.lambda()),
            DistKind::Deterministic => format!("periodic lambda={}", self.arrival.lambda()),
            _ => format!("{} (rate {})", self.arrival.law(), self.arrival.lambda()),
        };
        let _ = writeln!(
            out,
            "validation: {} | {} | arrival {arrival}",
            self.policy, self.service
        );
        let _ = writeln!(
            out,
            "horizon {} warmup {} reps {} seed {}",
            self.settings.horizon, self.settings.warmup, self.settings.reps, self.settings.seed
        );
        let _ = writeln!(
            out,
            "{:<28} {:>14} {:>14} {:>12} {:>12}  verdict",
            "quantity", "analytic", "simulated", "stderr", "tolerance"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<28} {:>14.6} {:>14.6} {:>12.3e} {:>12.3e}  {}",
                r.quantity, r.analytic, r.simulated, r.stderr, r.tolerance, r.verdict
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Compares the analytic evaluators with a simulation of the same system.
/// Failures are report content, never errors.
pub fn validate(
    arrival: &ArrivalProcess,
    service: &ServiceDistribution,
    policy: &PolicyConfig,
    settings: &SimSettings,
) -> ValidationReport {
    let mut report = ValidationReport {
        arrival: *arrival,
        service: *service,
        policy: *policy,
        settings: *settings,
        rows: Vec::new(),
        notes: Vec::new(),
    };
    let config = settings.sim_config(*arrival, *service, *policy);
    let sim = match sim::run_replications(&config, settings.reps, settings.seed) {
        Ok(r) => r,
        Err(e) => {
            report.notes.push(format!("simulation failed: {e}"));
            return report;
        }
    };
    let mut note = |what: &str, e: crate::Error| report.notes.push(format!("{what}: {e}"));
    let mut rows = Vec::new();

    let floor = analytic::a_min(arrival);
    rows.push(ValidationRow::info("age floor a_min", floor, sim.avg_age));

    match policy {
        PolicyConfig::LcfspSingle { preemption } => {
            match analytic::lcfsp_age(arrival, service) {
                Ok(a) => rows.push(ValidationRow::compare("lcfsp age", a, sim.avg_age, sim.age_stderr)),
                Err(e) => note("lcfsp age", e),
            }
            if arrival.is_poisson() {
                if *preemption == Preemption::Resume {
                    match analytic::mg1_lcfs_resume_delay(arrival, service) {
                        Ok(d) => rows.push(ValidationRow::compare(
                            "resume sojourn E[S]/(1-rho)",
                            d,
                            sim.avg_delay,
                            sim.delay_stderr,
                        )),
                        Err(e) => note("resume sojourn", e),
                    }
                }
                if let Ok(d) = analytic::mg1_lcfsp_delay(arrival, service) {
                    rows.push(ValidationRow::info("m/g/1 delay formula", d, sim.avg_delay));
                }
                if let Ok(v) = analytic::lcfsp_age_mean_service_variant(arrival, service) {
                    rows.push(ValidationRow::info("mean-service age variant", v, sim.avg_age));
                }
            }
        }
        PolicyConfig::InfiniteServer => {
            match analytic::gginf_age(arrival, service, settings.mc_paths, settings.seed) {
                Ok((a, est)) => {
                    let se = sim.age_stderr.hypot(est.std_error);
                    rows.push(ValidationRow::compare("infinite-server age", a, sim.avg_age, se));
                }
                Err(e) => note("infinite-server age", e),
            }
            rows.push(ValidationRow::compare(
                "delay = E[S]",
                service.mean(),
                sim.avg_delay,
                sim.delay_stderr,
            ));
            let var = service.variance();
            if var.is_finite() {
                // delay equals service time, so the pooled sample variance estimates Var(S);
                // normal-theory standard error of a sample variance
                let se = sim.delay_var * (2.0 / sim.delay_stats.count() as f64).sqrt();
                rows.push(ValidationRow::compare(
                    "delay variance = Var(S)",
                    var,
                    sim.delay_var,
                    se,
                ));
            }
        }
        PolicyConfig::FcfsSingle => {
            if arrival.is_poisson() {
                // for FCFS the M/G/1 formula is the exact mean sojourn
                match analytic::mg1_lcfsp_delay(arrival, service) {
                    Ok(d) if d.is_finite() => rows.push(ValidationRow::compare(
                        "fcfs m/g/1 delay",
                        d,
                        sim.avg_delay,
                        sim.delay_stderr,
                    )),
                    Ok(_) => {}
                    Err(e) => note("fcfs delay", e),
                }
            }
        }
        PolicyConfig::FcfsPool { .. } => {}
    }
    let var = service.variance();
    if var.is_finite() && !matches!(policy, PolicyConfig::InfiniteServer) {
        rows.push(ValidationRow::info("delay variance floor Var(S)", var, sim.delay_var));
    }
    report.rows = rows;
    report
}
