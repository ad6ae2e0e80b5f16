//! Queue-state traffic signal control for a single four-way intersection.
//!
//! * [`lane`] and [`conflict`]: the twelve movements and which pairs may collide.
//! * [`queue`]: the per-queue priority automaton (levels 0..=4, Active, Waiting-Active).
//! * [`scheduler`]: the conflict matrix and selection of the next conflict-free green set.
//! * [`sim`]: a deterministic one-second-step simulator plus baseline controllers.
//! * [`geometry`]: lane assignment and occupancy density for camera-side inputs.
//!
//! Formulas and geometry are generic over [`Scalar`] (`f32`/`f64`); the
//! aliases below fix them to `f64`, which the simulator uses throughout.

pub mod conflict;
pub mod error;
pub mod geometry;
pub mod lane;
pub mod queue;
pub mod report;
pub mod scalar;
pub mod scheduler;
pub mod sim;
pub mod vehicle;
pub mod verify;

pub use conflict::{default_conflict_relation, ConflictRelation};
pub use error::{Error, Result};
pub use lane::{lane_index, LaneId, Road, Turn, LANE_COUNT};
pub use queue::{dwell_time, time_to_empty, QueueState, I_MAX};
pub use scalar::Scalar;
pub use scheduler::{ConflictMatrix, RuleChange, Selection};
pub use sim::{run, run_with, ControllerKind, MetricsRecord, Scenario, SimConfig};
pub use vehicle::{waiting_time, Vehicle, VehicleClass};

pub type DwellParams = queue::DwellParams<f64>;
pub type QueueObservation = queue::QueueObservation<f64>;
pub type QueueDynamics = queue::QueueDynamics<f64>;
pub type GreenPhase = scheduler::GreenPhase<f64>;
pub type LaneGrant = scheduler::LaneGrant<f64>;
pub type Point = geometry::Point<f64>;
pub type CalibrationLine = geometry::CalibrationLine<f64>;
pub type DetectionBox = geometry::DetectionBox<f64>;
