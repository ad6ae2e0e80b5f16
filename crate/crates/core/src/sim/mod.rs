//! Deterministic one-second-step simulation of a single intersection.

pub mod config;
pub mod controller;
pub mod metrics;
pub mod rng;
pub mod sweep;
pub mod world;

pub use config::{Scenario, SimConfig, CONFIG_KEYS};
pub use controller::{
    default_phase_groups, greedy_phase_groups, AdaptiveController, Controller, ControllerKind, Decision,
    FixedCycleController, GreedyLongestController, TickView,
};
pub use metrics::{DepartureRecord, MetricsRecord};
pub use sweep::{run_serial, SweepCell, SweepSpec};
pub use world::{run, run_with, EntryQueueSim, ExitQueueSim, ExitState, World};
