//! Deterministic multi-rate simulator for a lunar habitat.
//!
//! The crate is organized around a small simulation kernel ([`engine`],
//! [`bus`]) and a set of habitat subsystems that plug into it: a hazard
//! initiator owning the fire model ([`disturbance`]), a two-zone interior
//! environment ([`environment`]), environmental control ([`eclss`]), power
//! generation and storage ([`power`]), and fault detection plus the repair
//! agent ([`fdd`]). [`scenario`] wires everything together from a validated
//! configuration and produces a [`RunResult`] time series.
//!
//! A single run is strictly single-threaded and reproducible: the same
//! configuration and seed yield bit-identical output. Parallelism only ever
//! exists across independent runs.

pub mod bus;
pub mod channels;
pub mod disturbance;
pub mod eclss;
pub mod engine;
pub mod environment;
pub mod fdd;
pub mod power;
pub mod rng;
pub mod scenario;
pub mod signal;

pub use engine::{Engine, RunError, RunResult, StepError, Subsystem, SubsystemDescriptor};
pub use scenario::{run_scenario, ScenarioConfig, TimeSeriesRecord, ValidationError};
pub use signal::{ChannelId, ChannelSpec, SignalFrame, SignalKind};

/// Ideal gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314;
