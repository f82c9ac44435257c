//! Sources of inter-generation and service draws.
//!
//! The simulator, the recursion-based LCFSp age computer and the min-term
//! estimator all pull draws through [`DrawSource`], so tests can replay the same
//! inputs through two independent computations.

use rand::Rng;

use crate::distributions::{ArrivalProcess, ServiceDistribution};

pub trait DrawSource {
    /// Time until the next packet is generated.
    fn next_interarrival(&mut self) -> f64;
    /// Service requirement of a newly generated packet.
    fn next_service(&mut self) -> f64;
}

/// Draws from the configured laws using one random stream.
#[derive(Debug)]
pub struct RandomDraws<'a, R> {
    arrival: &'a ArrivalProcess,
    service: &'a ServiceDistribution,
    rng: R,
}

impl<'a, R: Rng> RandomDraws<'a, R> {
    pub fn new(arrival: &'a ArrivalProcess, service: &'a ServiceDistribution, rng: R) -> Self {
        Self { arrival, service, rng }
    }
}

impl<R: Rng> DrawSource for RandomDraws<'_, R> {
    fn next_interarrival(&mut self) -> f64 {
        self.arrival.sample(&mut self.rng)
    }

    fn next_service(&mut self) -> f64 {
        self.service.sample(&mut self.rng)
    }
}

impl<D: DrawSource + ?Sized> DrawSource for &mut D {
    fn next_interarrival(&mut self) -> f64 {
        (**self).next_interarrival()
    }

    fn next_service(&mut self) -> f64 {
        (**self).next_service()
    }
}

/// Replays fixed sequences. Once a sequence is exhausted it yields `+inf`
/// (no further generation, or a service that never completes).
#[derive(Debug, Clone, Default)]
pub struct ScriptedDraws {
    gaps: Vec<f64>,
    services: Vec<f64>,
    next_gap: usize,
    next_service: usize,
}

impl ScriptedDraws {
    pub fn new(gaps: Vec<f64>, services: Vec<f64>) -> Self {
        Self {
            gaps,
            services,
            next_gap: 0,
            next_service: 0,
        }
    }
}

impl DrawSource for ScriptedDraws {
    fn next_interarrival(&mut self) -> f64 {
        let v = self.gaps.get(self.next_gap).copied().unwrap_or(f64::INFINITY);
        self.next_gap += 1;
        v
    }

    fn next_service(&mut self) -> f64 {
        let v = self.services.get(self.next_service).copied().unwrap_or(f64::INFINITY);
        self.next_service += 1;
        v
    }
}
