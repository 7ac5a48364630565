//! Distributed robust range-based source localization.
//!
//! A connected network of range sensors jointly estimates an unknown source
//! position by alternating neighbor diffusion with sub-gradient steps on each
//! node's absolute range residual. The crate bundles:
//!
//! - random geometric network generation with degree and connectivity
//!   constraints ([`geometry`]);
//! - range measurement synthesis under uniform-outlier, Laplace-mixture, and
//!   Cauchy corruption ([`measurement`]);
//! - the distributed solver itself plus its decaying schedules ([`solver`],
//!   [`schedule`]);
//! - centralized reference solvers ([`baselines`]) and error metrics
//!   ([`metrics`]);
//! - a seeded, trial-parallel experiment harness with CSV/JSON reporting
//!   ([`harness`], [`report`]) and self-check suites ([`diagnostics`]).
//!
//! Everything downstream of a master seed is deterministic: trials draw from
//! streams keyed on `(master seed, sweep index, trial index, purpose)`, so
//! results are byte-identical regardless of thread count.

pub mod baselines;
pub mod diagnostics;
pub mod geometry;
pub mod harness;
pub mod measurement;
pub mod metrics;
pub mod point;
pub mod report;
pub mod rng;
pub mod schedule;
pub mod solver;

pub use geometry::{generate_network, NetworkParams, SensorNetwork};
pub use measurement::{true_ranges, MeasurementSet, NoiseScenario};
pub use point::Point;
pub use schedule::Schedule;
pub use solver::{dsrl_run, RunTrace};
