//! Age-of-information and packet-delay laboratory for multi-server update systems.
//!
//! * [`distributions`]: service and inter-generation laws with fixed mean.
//! * [`analytic`]: closed-form and semi-analytic age/delay evaluators.
//! * [`sim`]: seedable discrete-event simulator (LCFS preemptive, FCFS pool, infinite server).
//! * [`experiments`]: sweeps, age-vs-rate curves, scalarized search and validation.

pub mod analytic;
pub mod distributions;
pub mod draws;
pub mod error;
pub mod experiments;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod stats;

pub use distributions::{ArrivalProcess, DistFamily, DistKind, ServiceDistribution};
pub use error::{Error, Result};
