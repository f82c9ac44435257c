use aoi_core::analytic::{a_min, lcfsp_age};
use aoi_core::draws::{RandomDraws, ScriptedDraws};
use aoi_core::rng::stream_rng;
use aoi_core::sim::*;
use aoi_core::{ArrivalProcess, Error, ServiceDistribution};

fn poisson(l: f64) -> ArrivalProcess {
    ArrivalProcess::poisson(l).unwrap()
}

fn exp(mu: f64) -> ServiceDistribution {
    ServiceDistribution::exponential(mu).unwrap()
}

fn cfg(arrival: ArrivalProcess, service: ServiceDistribution, policy: PolicyConfig, horizon: f64) -> SimConfig {
    SimConfig {
        arrival,
        service,
        policy,
        horizon,
        warmup: 0.1 * horizon,
    }
}

fn all_policies() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::lcfsp(),
        PolicyConfig::LcfspSingle {
            preemption: Preemption::Restart,
        },
        PolicyConfig::FcfsSingle,
        PolicyConfig::FcfsPool { servers: 3 },
        PolicyConfig::InfiniteServer,
    ]
}

#[test]
fn mm1_lcfsp_age_matches_closed_form() {
    let c = cfg(poisson(0.5), exp(0.8), PolicyConfig::lcfsp(), 2e6);
    let r = run(&c, 11).unwrap();
    let want = lcfsp_age(&c.arrival, &c.service).unwrap();
    assert!((r.avg_age - want).abs() < 0.01 * want, "{}", r.avg_age);
}

#[test]
fn gd_infinite_age_and_exact_delay() {
    let c = cfg(
        poisson(0.5),
        ServiceDistribution::deterministic(0.8).unwrap(),
        PolicyConfig::InfiniteServer,
        2e6,
    );
    let r = run(&c, 3).unwrap();
    assert!((r.avg_age - 3.25).abs() < 0.0325, "{}", r.avg_age);
    assert_eq!(r.avg_delay, 1.25);
    assert_eq!(r.delay_var, 0.0);
}

#[test]
fn mm1_delay_same_for_fcfs_and_lcfsp_resume() {
    let want = 1.0 / (0.8 - 0.5);
    for p in [PolicyConfig::FcfsSingle, PolicyConfig::lcfsp()] {
        let r = run_replications(&cfg(poisson(0.5), exp(0.8), p, 2e6), 4, 5).unwrap();
        assert!((r.avg_delay - want).abs() < 0.01 * want, "{p}: {}", r.avg_delay);
    }
}

#[test]
fn replications_shrink_stderr_and_are_deterministic() {
    let c = cfg(poisson(0.5), exp(0.8), PolicyConfig::lcfsp(), 2e6);
    let r = run_replications(&c, 16, 21).unwrap();
    assert!(r.age_stderr < 0.02, "{}", r.age_stderr);
    assert_eq!(r.replications, 16);
    let again = run_replications(&c, 16, 21).unwrap();
    assert_eq!(format!("{r:?}"), format!("{again:?}"));
    let one = run_replications(&c, 1, 21).unwrap();
    assert_eq!(format!("{one:?}"), format!("{:?}", run(&c, 21).unwrap()));
}

#[test]
fn replication_zero_is_rejected() {
    let c = cfg(poisson(0.5), exp(0.8), PolicyConfig::lcfsp(), 100.0);
    assert!(matches!(
        run_replications(&c, 0, 1),
        Err(Error::InvalidParameter { .. })
    ));
}

#[test]
fn runs_are_bit_identical() {
    let law = ServiceDistribution::lognormal(0.8, 1.5).unwrap();
    for p in all_policies() {
        let c = cfg(poisson(0.5), law, p, 5e4);
        let a = run(&c, 99).unwrap();
        let b = run(&c, 99).unwrap();
        assert_eq!(a.avg_age.to_bits(), b.avg_age.to_bits());
        assert_eq!(a.avg_delay.to_bits(), b.avg_delay.to_bits());
        assert_eq!(a.delay_var.to_bits(), b.delay_var.to_bits());
        assert_eq!(a.n_delivered, b.n_delivered);
        let c2 = run(&c, 100).unwrap();
        assert_ne!(a.avg_age, c2.avg_age);
    }
}

#[test]
fn trace_integral_reproduces_run_area() {
    for p in all_policies() {
        let c = cfg(poisson(0.5), ServiceDistribution::pareto(0.8, 1.5).unwrap(), p, 2e4);
        let (r, trace) = full_age_trace(&c, 8).unwrap();
        let area = r.avg_age * (c.horizon - c.warmup);
        let t_area = trace_area(&trace);
        assert!((t_area - area).abs() <= 1e-9 * area, "{p}: {t_area} vs {area}");
        assert_eq!(trace.first().unwrap().0, c.warmup);
        assert_eq!(trace.last().unwrap().0, c.horizon);
        assert_eq!(r.avg_age, run(&c, 8).unwrap().avg_age);
        let small = age_trace(&c, 8, 50).unwrap();
        assert!(small.len() <= 50);
        assert_eq!(small.last(), trace.last());
    }
}

#[test]
fn deterministic_sawtooth() {
    let c = SimConfig {
        arrival: ArrivalProcess::periodic(0.5).unwrap(),
        service: ServiceDistribution::deterministic(2.0).unwrap(),
        policy: PolicyConfig::InfiniteServer,
        horizon: 100.0,
        warmup: 0.0,
    };
    let (r, trace) = full_age_trace(&c, 1).unwrap();
    let drops: Vec<(f64, f64)> = trace
        .windows(2)
        .filter(|w| w[0].0 == w[1].0 && w[1].1 < w[0].1)
        .map(|w| (w[1].0, w[1].1))
        .collect();
    assert_eq!(drops.len(), 49);
    for (k, (t, age)) in drops.iter().enumerate() {
        assert!((t - (2.5 + 2.0 * k as f64)).abs() < 1e-9, "{k}: {t}");
        assert!((age - 0.5).abs() < 1e-9);
    }
    for w in drops.windows(2) {
        assert!((w[1].0 - w[0].0 - 2.0).abs() < 1e-9);
    }
    assert!(r.delay_var == 0.0 && r.avg_delay == 0.5);
}

#[test]
fn overtaken_packet_causes_no_drop() {
    // packet 1: generated at 1, needs 3, arrives at 4
    // packet 2: generated at 2, needs 0.5, arrives at 2.5 and overtakes it
    let draws = ScriptedDraws::new(vec![1.0, 1.0], vec![3.0, 0.5]);
    let (r, trace) = run_with_draws(&PolicyConfig::InfiniteServer, 6.0, 0.0, draws).unwrap();
    assert_eq!(r.n_delivered, 2);
    assert_eq!(r.n_informative, 1);
    assert_eq!(trace, vec![(0.0, 0.0), (2.5, 2.5), (2.5, 0.5), (6.0, 4.0)]);
    assert!((r.avg_age - 11.0 / 6.0).abs() < 1e-12);
    assert_eq!(r.avg_delay, 1.75);
}

#[test]
fn age_never_below_minimum() {
    let laws = [
        ServiceDistribution::deterministic(0.8).unwrap(),
        exp(0.8),
        ServiceDistribution::pareto(0.8, 1.01).unwrap(),
        ServiceDistribution::lognormal(0.8, 5.0).unwrap(),
        ServiceDistribution::weibull(0.8, 0.1).unwrap(),
    ];
    for law in laws {
        for p in all_policies() {
            if p.is_fcfs() && law.variance() > 10.0 {
                continue;
            }
            let c = cfg(poisson(0.5), law, p, 2e5);
            let r = run_replications(&c, 4, 2).unwrap();
            assert!(
                r.avg_age >= a_min(&c.arrival) - 3.0 * r.age_stderr,
                "{law} {p}: {}",
                r.avg_age
            );
            assert!(r.n_informative <= r.n_delivered);
        }
    }
}

/// Loose standard error of a sample variance, scaled from the sample itself.
fn variance_se(r: &SimResult) -> f64 {
    3.0 * r.delay_var * (2.0 / r.delay_stats.count() as f64).sqrt()
}

#[test]
fn delay_variance_floor() {
    for law in [
        exp(0.8),
        ServiceDistribution::pareto(0.8, 3.0).unwrap(),
        ServiceDistribution::weibull(0.8, 0.7).unwrap(),
    ] {
        let vs = law.variance();
        // delays are the service draws themselves
        let inf = run(&cfg(poisson(0.5), law, PolicyConfig::InfiniteServer, 1e6), 4).unwrap();
        assert!(
            (inf.delay_var - vs).abs() < 5.0 * variance_se(&inf),
            "{law}: {} vs {vs}",
            inf.delay_var
        );
        for p in [PolicyConfig::FcfsSingle, PolicyConfig::FcfsPool { servers: 2 }] {
            let r = run_replications(&cfg(poisson(0.5), law, p, 5e5), 4, 4).unwrap();
            assert!(r.delay_var >= vs - 3.0 * variance_se(&r), "{law} {p}");
        }
    }
}

#[test]
fn infinite_server_dominates() {
    let laws = [
        exp(0.8),
        ServiceDistribution::pareto(0.8, 2.5).unwrap(),
        ServiceDistribution::lognormal(0.8, 1.0).unwrap(),
    ];
    for law in laws {
        let inf = run_replications(&cfg(poisson(0.5), law, PolicyConfig::InfiniteServer, 4e5), 4, 17).unwrap();
        for p in all_policies() {
            let r = run_replications(&cfg(poisson(0.5), law, p, 4e5), 4, 17).unwrap();
            let se = inf.age_stderr.hypot(r.age_stderr);
            assert!(
                inf.avg_age <= r.avg_age + 3.0 * se,
                "{law} {p}: {} vs {}",
                inf.avg_age,
                r.avg_age
            );
        }
    }
}

#[test]
fn packets_are_conserved() {
    for p in all_policies() {
        for law in [exp(0.8), ServiceDistribution::pareto(0.8, 1.2).unwrap()] {
            let r = run(&cfg(poisson(0.5), law, p, 1e5), 6).unwrap();
            assert_eq!(r.n_generated, r.n_delivered + r.n_in_system, "{p} {law}");
        }
    }
    let draws = ScriptedDraws::new(vec![1.0, 1.0, 1.0], vec![10.0, 10.0, 10.0]);
    let (r, _) = run_with_draws(&PolicyConfig::FcfsSingle, 5.0, 0.0, draws).unwrap();
    assert_eq!((r.n_generated, r.n_delivered, r.n_in_system), (3, 0, 3));
    assert!(r.avg_delay.is_nan());
}

#[test]
fn recursion_agrees_with_event_simulation() {
    let laws = [
        exp(0.8),
        ServiceDistribution::deterministic(0.8).unwrap(),
        ServiceDistribution::pareto(0.8, 1.5).unwrap(),
        ServiceDistribution::lognormal(0.8, 2.0).unwrap(),
        ServiceDistribution::weibull(0.8, 0.3).unwrap(),
    ];
    let arrivals = [poisson(0.5), ArrivalProcess::periodic(0.5).unwrap()];
    for a in arrivals {
        for law in laws {
            let (horizon, warmup) = (1e6, 1e5);
            let rec = lcfsp_recursion_age(RandomDraws::new(&a, &law, stream_rng(31, 0)), horizon, warmup);
            for p in [
                PolicyConfig::lcfsp(),
                PolicyConfig::LcfspSingle {
                    preemption: Preemption::Restart,
                },
            ] {
                let draws = RandomDraws::new(&a, &law, stream_rng(31, 0));
                let (sim, _) = run_with_draws(&p, horizon, warmup, draws).unwrap();
                assert!(
                    (sim.avg_age - rec).abs() < 0.01 * rec,
                    "{law} {p}: {} vs {rec}",
                    sim.avg_age
                );
            }
        }
    }
}

#[test]
fn doubling_check_flags_infinite_variance() {
    let c = cfg(poisson(0.5), exp(0.8), PolicyConfig::lcfsp(), 2e5);
    let ok = horizon_doubling_check(&c, 4, 1, 2).unwrap();
    assert!(ok.converged, "{ok:?}");
    assert_eq!(ok.estimates.len(), 3);
    let heavy = SimConfig {
        service: ServiceDistribution::pareto(0.8, 1.5).unwrap(),
        ..c
    };
    let bad = horizon_doubling_check(&heavy, 4, 1, 2).unwrap();
    assert!(!bad.converged, "{bad:?}");
}

#[test]
fn invalid_windows_rejected() {
    let mut c = cfg(poisson(0.5), exp(0.8), PolicyConfig::lcfsp(), 10.0);
    c.warmup = 10.0;
    assert!(run(&c, 1).is_err());
    c.warmup = 0.0;
    c.horizon = f64::INFINITY;
    assert!(run(&c, 1).is_err());
    let pool = cfg(poisson(0.5), exp(0.8), PolicyConfig::FcfsPool { servers: 0 }, 10.0);
    assert!(run(&pool, 1).is_err());
}
