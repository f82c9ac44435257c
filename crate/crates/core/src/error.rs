use thiserror::Error;

/// Errors produced by the analytic evaluators, the simulator and the experiment runners.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("quadrature did not reach relative tolerance {tolerance:e} (estimate {estimate:e}, error {abs_error:e}, {intervals} intervals)")]
    Quadrature {
        estimate: f64,
        abs_error: f64,
        tolerance: f64,
        intervals: usize,
    },

    #[error("degenerate preemption: P(S < X) = {probability:e} is numerically zero, age is effectively infinite")]
    DegeneratePreemption { probability: f64 },

    #[error("unstable: load rho = {rho} must be below 1")]
    Unstable { rho: f64 },

    #[error("{what} requires Poisson (exponential inter-generation) arrivals")]
    RequiresPoisson { what: &'static str },

    #[error("event budget exceeded after {events} events")]
    EventBudgetExceeded { events: u64 },

    #[error("replication {replication} (seed {seed}, stream {replication}) failed: {source}")]
    Replication {
        seed: u64,
        replication: u64,
        source: Box<Error>,
    },

    #[error("no finite point: every grid point has an infinite or undefined objective")]
    NoFinitePoint,
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
