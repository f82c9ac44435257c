//! Closed-form and semi-analytic age and delay evaluators.
//!
//! * `a_min = E[X^2] / (2 E[X])`: the age floor for any policy and service law.
//! * Single-server LCFS with preemption:
//!   `A = a_min + E[min(X, S)] / P(S < X)`.
//! * M/G/1 LCFS with preemption, packet delay:
//!   `D = (lambda/2) E[S^2] / (1 - rho) + E[S]`.
//! * Infinite-server age:
//!   `A = a_min + E[min_{l >= 0} (X_1 + ... + X_l + S_{l+1})]`, estimated by Monte Carlo.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{ArrivalProcess, DistFamily, ServiceDistribution};
use crate::draws::{DrawSource, RandomDraws};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::RunningStats;

/// Monte Carlo paths used when the caller does not choose.
pub const DEFAULT_MC_PATHS: u64 = 1_000_000;

/// Paths per independent random stream in the min-term estimator. Fixed so the
/// estimate does not depend on the number of worker threads.
const PATHS_PER_CHUNK: u64 = 16_384;

/// Below this, `P(S < X)` is treated as zero.
const MIN_COMPLETION_PROBABILITY: f64 = 1e-300;

/// `E[X^2] / (2 E[X])`; infinite when the inter-generation law has no second moment.
pub fn a_min(arrival: &ArrivalProcess) -> f64 {
    let second = arrival.law().second_moment();
    if second.is_infinite() {
        return f64::INFINITY;
    }
    0.5 * second / arrival.mean_interval()
}

/// The two ingredients of the LCFSp age formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcfspTerms {
    /// `P(S < X)`: a packet finishes before the next one is generated.
    pub p_complete: f64,
    /// `E[min(X, S)]`.
    pub mean_min: f64,
}

/// Evaluates `P(S < X)` and `E[min(X, S)]` for independent `X ~ F_X`, `S ~ F_S`.
///
/// Poisson generation uses the Laplace transform of `S`. Otherwise both terms are
/// one-dimensional integrals over `S` with closed-form inner expectations over `X`.
pub fn lcfsp_terms(arrival: &ArrivalProcess, service: &ServiceDistribution) -> Result<LcfspTerms> {
    let law = arrival.law();
    if !law.is_continuous() && !service.is_continuous() {
        return Err(Error::invalid(
            "service",
            "at least one of the inter-generation and service laws must be continuous",
        ));
    }
    if arrival.is_poisson() {
        let lambda = arrival.lambda();
        return Ok(LcfspTerms {
            p_complete: service.laplace(lambda)?,
            mean_min: service.laplace_complement(lambda)? / lambda,
        });
    }
    let p_complete = if law.is_continuous() {
        service.expect(|s| law.tail(s))?
    } else {
        // periodic generation with continuous service: ties have probability zero
        service.cdf(law.mean())
    };
    let mean_min = service.expect(|s| law.min_mean(s))?;
    Ok(LcfspTerms { p_complete, mean_min })
}

/// Average age of the single-server LCFS queue with preemption.
pub fn lcfsp_age(arrival: &ArrivalProcess, service: &ServiceDistribution) -> Result<f64> {
    let floor = a_min(arrival);
    let terms = lcfsp_terms(arrival, service)?;
    if !(terms.p_complete > MIN_COMPLETION_PROBABILITY) {
        return Err(Error::DegeneratePreemption {
            probability: terms.p_complete,
        });
    }
    let gap = terms.mean_min / terms.p_complete;
    if !gap.is_finite() {
        return Err(Error::DegeneratePreemption {
            probability: terms.p_complete,
        });
    }
    Ok(floor + gap)
}

/// Alternate M/G/1 LCFSp expression `E[S] / P(S < X)`.
///
/// It disagrees with [`lcfsp_age`] (e.g. 2.03125 against 3.25 for lambda = 0.5,
/// mu = 0.8 exponential service) and is only reported as an informational row by
/// the validation runner.
pub fn lcfsp_age_mean_service_variant(arrival: &ArrivalProcess, service: &ServiceDistribution) -> Result<f64> {
    if !arrival.is_poisson() {
        return Err(Error::RequiresPoisson {
            what: "the mean-service age variant",
        });
    }
    let p = service.laplace(arrival.lambda())?;
    if !(p > MIN_COMPLETION_PROBABILITY) {
        return Err(Error::DegeneratePreemption { probability: p });
    }
    Ok(service.mean() / p)
}

/// Mean packet delay `(lambda/2) E[S^2] / (1 - rho) + E[S]` under Poisson generation.
/// Infinite when `E[S^2]` diverges.
pub fn mg1_lcfsp_delay(arrival: &ArrivalProcess, service: &ServiceDistribution) -> Result<f64> {
    if !arrival.is_poisson() {
        return Err(Error::RequiresPoisson {
            what: "the M/G/1 delay formula",
        });
    }
    let lambda = arrival.lambda();
    let rho = lambda / service.mu();
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    let second = service.second_moment();
    if second.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * lambda * second / (1.0 - rho) + service.mean())
}

/// Mean sojourn time `E[S] / (1 - rho)` of M/G/1 LCFS with preemptive resume.
///
/// Every packet's sojourn is a busy period started by its own service, so only
/// `E[S]` enters. Agrees with [`mg1_lcfsp_delay`] for exponential service only.
pub fn mg1_lcfs_resume_delay(arrival: &ArrivalProcess, service: &ServiceDistribution) -> Result<f64> {
    if !arrival.is_poisson() {
        return Err(Error::RequiresPoisson {
            what: "the M/G/1 preemptive-resume delay",
        });
    }
    let rho = arrival.lambda() / service.mu();
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    Ok(service.mean() / (1.0 - rho))
}

/// Monte Carlo estimate of `E[min_{l >= 0} (X_1 + ... + X_l + S_{l+1})]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinTermEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: u64,
}

/// One sample of the min-term.
///
/// Draw order is `S_1, X_1, S_2, X_2, ...`. The running prefix sum only grows and
/// every service time is positive, so once the prefix reaches the current best no
/// later term can improve on it and the path stops.
pub fn min_term_path<D: DrawSource>(draws: &mut D) -> f64 {
    let mut best = draws.next_service();
    let mut prefix = 0.0;
    loop {
        prefix += draws.next_interarrival();
        if prefix >= best {
            return best;
        }
        let candidate = prefix + draws.next_service();
        if candidate < best {
            best = candidate;
        }
    }
}

/// Estimates the min-term with `n_paths` independent paths derived from `seed`.
pub fn min_term(
    arrival: &ArrivalProcess,
    service: &ServiceDistribution,
    n_paths: u64,
    seed: u64,
) -> Result<MinTermEstimate> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "need at least one path"));
    }
    if !service.is_continuous() {
        // every term after the first adds a nonnegative prefix to the same S
        return Ok(MinTermEstimate {
            value: service.mean(),
            std_error: 0.0,
            n_paths,
        });
    }
    let chunks = n_paths.div_ceil(PATHS_PER_CHUNK);
    let partials: Vec<RunningStats> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let paths = PATHS_PER_CHUNK.min(n_paths - chunk * PATHS_PER_CHUNK);
            let mut draws = RandomDraws::new(arrival, service, stream_rng(seed, chunk));
            let mut stats = RunningStats::new();
            for _ in 0..paths {
                stats.push(min_term_path(&mut draws));
            }
            stats
        })
        .collect();
    let mut total = RunningStats::new();
    for p in &partials {
        total.merge(p);
    }
    Ok(MinTermEstimate {
        value: total.mean(),
        std_error: total.std_error(),
        n_paths,
    })
}

/// Infinite-server average age and the min-term estimate behind it.
/// Deterministic service gives `a_min + 1/mu` exactly.
pub fn gginf_age(
    arrival: &ArrivalProcess,
    service: &ServiceDistribution,
    n_paths: u64,
    seed: u64,
) -> Result<(f64, MinTermEstimate)> {
    let estimate = min_term(arrival, service, n_paths, seed)?;
    Ok((a_min(arrival) + estimate.value, estimate))
}

/// One `(shape, x)` evaluation of the two heavy-tail conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficiencyRow {
    pub shape: Option<f64>,
    pub x: f64,
    pub tail: f64,
    pub truncated_mean: f64,
}

/// Numeric check of the limit conditions `P(S > x) -> 0` and
/// `E[S 1{S <= x}] -> 0` along a family's shape sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficiencyReport {
    pub rows: Vec<SufficiencyRow>,
    pub threshold: f64,
    /// Largest `P(S > x)` over the grid at the last shape.
    pub final_tail_max: f64,
    /// Largest `E[S 1{S <= x}]` over the grid at the last shape.
    pub final_truncated_mean_max: f64,
    pub tail_condition: bool,
    pub truncated_mean_condition: bool,
    /// For every x, the tail is nonincreasing along the sequence.
    pub tail_nonincreasing: bool,
    pub truncated_mean_nonincreasing: bool,
}

impl SufficiencyReport {
    pub fn holds(&self) -> bool {
        self.tail_condition && self.truncated_mean_condition
    }
}

pub fn check_suff_conditions(family: &DistFamily, x_grid: &[f64], threshold: f64) -> Result<SufficiencyReport> {
    if x_grid.is_empty() || x_grid.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::invalid("x_grid", "need a nonempty grid of positive points"));
    }
    let members = family.members();
    let mut rows = Vec::with_capacity(members.len() * x_grid.len());
    for d in &members {
        for &x in x_grid {
            rows.push(SufficiencyRow {
                shape: d.shape(),
                x,
                tail: d.tail(x),
                truncated_mean: d.truncated_mean(x),
            });
        }
    }
    let last = &rows[rows.len() - x_grid.len()..];
    let final_tail_max = last.iter().map(|r| r.tail).fold(0.0, f64::max);
    let final_truncated_mean_max = last.iter().map(|r| r.truncated_mean).fold(0.0, f64::max);

    let nonincreasing = |pick: fn(&SufficiencyRow) -> f64| {
        (0..x_grid.len()).all(|j| {
            rows.iter()
                .skip(j)
                .step_by(x_grid.len())
                .map(pick)
                .collect::<Vec<_>>()
                .windows(2)
                .all(|w| w[1] <= w[0])
        })
    };
    let tail_nonincreasing = nonincreasing(|r| r.tail);
    let truncated_mean_nonincreasing = nonincreasing(|r| r.truncated_mean);

    Ok(SufficiencyReport {
        threshold,
        final_tail_max,
        final_truncated_mean_max,
        tail_condition: final_tail_max < threshold,
        truncated_mean_condition: final_truncated_mean_max < threshold,
        tail_nonincreasing,
        truncated_mean_nonincreasing,
        rows,
    })
}

/// Min-term estimates along a family paired with the tail conditions, so the
/// "min-term vanishes iff both conditions hold" relation can be checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub estimates: Vec<(Option<f64>, MinTermEstimate)>,
    pub conditions: SufficiencyReport,
    pub min_term_vanishes: bool,
    /// Both vanish together, or neither does.
    pub consistent: bool,
}

pub fn min_term_to_zero_witness(
    arrival: &ArrivalProcess,
    family: &DistFamily,
    x_grid: &[f64],
    n_paths: u64,
    seed: u64,
    threshold: f64,
) -> Result<WitnessReport> {
    let conditions = check_suff_conditions(family, x_grid, threshold)?;
    let estimates = family
        .members()
        .iter()
        .enumerate()
        .map(|(j, d)| min_term(arrival, d, n_paths, derive_seed(seed, j as u64)).map(|e| (d.shape(), e)))
        .collect::<Result<Vec<_>>>()?;
    let last = estimates.last().expect("families have at least one member").1;
    let min_term_vanishes = last.value < threshold;
    Ok(WitnessReport {
        consistent: min_term_vanishes == conditions.holds(),
        min_term_vanishes,
        estimates,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistKind;
    use crate::draws::ScriptedDraws;

    fn poisson(l: f64) -> ArrivalProcess {
        ArrivalProcess::poisson(l).unwrap()
    }

    #[test]
    fn a_min_examples() {
        assert_eq!(a_min(&poisson(0.5)), 2.0);
        assert_eq!(a_min(&poisson(1.0)), 1.0);
        assert_eq!(a_min(&ArrivalProcess::periodic(0.5).unwrap()), 1.0);
        let heavy = ArrivalProcess::new(ServiceDistribution::pareto(0.5, 1.5).unwrap());
        assert_eq!(a_min(&heavy), f64::INFINITY);
    }

    #[test]
    fn lcfsp_mm1_closed_form() {
        let a = lcfsp_age(&poisson(0.5), &ServiceDistribution::exponential(0.8).unwrap()).unwrap();
        assert!((a - 3.25).abs() < 1e-12, "{a}");
    }

    #[test]
    fn lcfsp_md1() {
        let a = lcfsp_age(&poisson(0.5), &ServiceDistribution::deterministic(0.8).unwrap()).unwrap();
        let expected = 2.0 * 0.625f64.exp();
        assert!((a - expected).abs() < 1e-12, "{a} vs {expected}");
    }

    #[test]
    fn lcfsp_general_route_matches_poisson_route() {
        // Weibull kappa=1 arrivals are exponential but take the quadrature route
        let poisson_like = ArrivalProcess::new(ServiceDistribution::weibull(0.5, 1.0).unwrap());
        for service in [
            ServiceDistribution::exponential(0.8).unwrap(),
            ServiceDistribution::deterministic(0.8).unwrap(),
            ServiceDistribution::pareto(0.8, 1.5).unwrap(),
            ServiceDistribution::lognormal(0.8, 1.0).unwrap(),
        ] {
            let a = lcfsp_age(&poisson(0.5), &service).unwrap();
            let b = lcfsp_age(&poisson_like, &service).unwrap();
            assert!((a - b).abs() < 1e-8 * a, "{service}: {a} vs {b}");
        }
    }

    #[test]
    fn lcfsp_periodic_with_exponential_service() {
        // X = c, S ~ Exp(mu): P(S < c) = 1 - e^{-mu c}, E[min(c, S)] = (1 - e^{-mu c}) / mu
        let arrival = ArrivalProcess::periodic(0.5).unwrap();
        let service = ServiceDistribution::exponential(0.8).unwrap();
        let a = lcfsp_age(&arrival, &service).unwrap();
        assert!((a - (1.0 + 1.0 / 0.8)).abs() < 1e-9, "{a}");
    }

    #[test]
    fn both_deterministic_rejected() {
        let err = lcfsp_age(
            &ArrivalProcess::periodic(0.5).unwrap(),
            &ServiceDistribution::deterministic(0.8).unwrap(),
        );
        assert!(matches!(err, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn degenerate_preemption() {
        // periodic generation every 0.1, Pareto service with theta = 1.6 > 0.1: never completes
        let arrival = ArrivalProcess::periodic(10.0).unwrap();
        let service = ServiceDistribution::pareto(0.5, 5.0).unwrap();
        assert!(matches!(
            lcfsp_age(&arrival, &service),
            Err(Error::DegeneratePreemption { .. })
        ));
    }

    #[test]
    fn mean_service_variant_mm1() {
        let v = lcfsp_age_mean_service_variant(&poisson(0.5), &ServiceDistribution::exponential(0.8).unwrap()).unwrap();
        assert!((v - 2.03125).abs() < 1e-12);
    }

    #[test]
    fn mg1_delay_examples() {
        let d = mg1_lcfsp_delay(&poisson(0.5), &ServiceDistribution::exponential(0.8).unwrap()).unwrap();
        assert!((d - 10.0 / 3.0).abs() < 1e-12);
        let d = mg1_lcfsp_delay(&poisson(0.5), &ServiceDistribution::deterministic(0.8).unwrap()).unwrap();
        assert!((d - (0.25 * 1.5625 / 0.375 + 1.25)).abs() < 1e-12);
        assert!((d - 2.291_666_666_666_667).abs() < 1e-12);
        let d = mg1_lcfsp_delay(&poisson(0.5), &ServiceDistribution::pareto(0.8, 1.5).unwrap()).unwrap();
        assert_eq!(d, f64::INFINITY);
        assert!(matches!(
            mg1_lcfsp_delay(&poisson(0.9), &ServiceDistribution::exponential(0.8).unwrap()),
            Err(Error::Unstable { .. })
        ));
        assert!(matches!(
            mg1_lcfsp_delay(
                &ArrivalProcess::periodic(0.5).unwrap(),
                &ServiceDistribution::exponential(0.8).unwrap()
            ),
            Err(Error::RequiresPoisson { .. })
        ));
    }

    #[test]
    fn resume_delay_matches_mg1_only_for_exponential() {
        let a = poisson(0.5);
        let exp = ServiceDistribution::exponential(0.8).unwrap();
        let det = ServiceDistribution::deterministic(0.8).unwrap();
        let r = mg1_lcfs_resume_delay(&a, &exp).unwrap();
        assert!((r - mg1_lcfsp_delay(&a, &exp).unwrap()).abs() < 1e-12);
        assert!((mg1_lcfs_resume_delay(&a, &det).unwrap() - r).abs() < 1e-12);
        assert!(mg1_lcfsp_delay(&a, &det).unwrap() < r);
    }

    #[test]
    fn gginf_deterministic_short_circuit() {
        let (age, est) = gginf_age(&poisson(0.5), &ServiceDistribution::deterministic(0.8).unwrap(), 10, 1).unwrap();
        assert_eq!(age, 2.0 + 1.25);
        assert_eq!(est.std_error, 0.0);
        let (age, _) = gginf_age(
            &ArrivalProcess::periodic(0.5).unwrap(),
            &ServiceDistribution::deterministic(0.8).unwrap(),
            10,
            1,
        )
        .unwrap();
        assert_eq!(age, 1.0 + 1.25);
    }

    #[test]
    fn min_term_early_stop_matches_brute_force_on_shared_inputs() {
        use rand::Rng;
        let mut rng = stream_rng(99, 0);
        let service = ServiceDistribution::pareto(0.8, 1.2).unwrap();
        let arrival = poisson(0.5);
        for _ in 0..2000 {
            let ss: Vec<f64> = (0..1001).map(|_| service.sample(&mut rng)).collect();
            let xs: Vec<f64> = (0..1000).map(|_| arrival.sample(&mut rng)).collect();
            let mut brute = f64::INFINITY;
            let mut prefix = 0.0;
            for l in 0..=1000 {
                if l > 0 {
                    prefix += xs[l - 1];
                }
                brute = brute.min(prefix + ss[l]);
            }
            let mut scripted = ScriptedDraws::new(xs, ss);
            let early = min_term_path(&mut scripted);
            assert_eq!(early, brute);
            let _: f64 = rng.random();
        }
    }

    #[test]
    fn min_term_is_thread_count_independent() {
        let a = poisson(0.5);
        let s = ServiceDistribution::exponential(0.8).unwrap();
        let e1 = min_term(&a, &s, 50_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let e2 = pool.install(|| min_term(&a, &s, 50_000, 5).unwrap());
        assert_eq!(e1, e2);
    }

    #[test]
    fn sufficiency_deterministic_fails() {
        let fam = DistFamily::new(DistKind::Deterministic, 0.8, vec![]).unwrap();
        let r = check_suff_conditions(&fam, &[0.5, 1.0, 1.25, 5.0], 0.01).unwrap();
        assert!(!r.truncated_mean_condition);
        assert!(!r.holds());
        for row in &r.rows {
            if row.x >= 1.25 {
                assert_eq!(row.truncated_mean, 1.25);
            }
        }
    }

    #[test]
    fn sufficiency_pareto_holds() {
        let fam = DistFamily::new(DistKind::Pareto, 1.0, vec![1.5, 1.1, 1.01, 1.001]).unwrap();
        let r = check_suff_conditions(&fam, &[0.5, 1.0, 5.0], 0.01).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.tail_nonincreasing && r.truncated_mean_nonincreasing);
    }

    #[test]
    fn sufficiency_weibull_tail_monotone_at_one() {
        let fam = DistFamily::new(DistKind::Weibull, 1.0, vec![1.0, 0.5, 0.2, 0.05]).unwrap();
        let r = check_suff_conditions(&fam, &[1.0], 0.05).unwrap();
        assert!(r.tail_nonincreasing);
        let tails: Vec<f64> = r.rows.iter().map(|r| r.tail).collect();
        assert!(tails.windows(2).all(|w| w[1] < w[0]), "{tails:?}");
        assert!(r.holds());
    }

    #[test]
    fn bad_x_grid() {
        let fam = DistFamily::new(DistKind::Exponential, 1.0, vec![]).unwrap();
        assert!(check_suff_conditions(&fam, &[], 0.1).is_err());
        assert!(check_suff_conditions(&fam, &[0.0], 0.1).is_err());
    }
}
