//! Per-queue priority automaton.
//!
//! A red queue climbs internal levels `0..=4` while it holds vehicles, one level
//! per dwell period. The dwell period is recomputed at the start of every cycle
//! from how long the previous green needed, so heavily loaded queues climb
//! faster. Emergency arrivals jump the queue to level 4 (or to waiting-active
//! when already there). Only the controller moves a queue into or out of
//! Active.

use std::fmt;

use crate::error::{Error, Result};
use crate::lane::LaneId;
use crate::scalar::Scalar;

/// Highest internal (red) level.
pub const I_MAX: i8 = 4;

/// Diagonal value of a queue: `-1` Active, `0..=4` internal level, `5` waiting-active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueueState(i8);

impl QueueState {
    pub const ACTIVE: QueueState = QueueState(-1);
    pub const WAITING_ACTIVE: QueueState = QueueState(I_MAX + 1);
    pub const ZERO: QueueState = QueueState(0);
    pub const MAX_LEVEL: QueueState = QueueState(I_MAX);

    pub fn new(value: i8) -> Result<Self> {
        if (-1..=I_MAX + 1).contains(&value) {
            Ok(QueueState(value))
        } else {
            Err(Error::Domain(format!("queue state {value} outside -1..=5")))
        }
    }

    pub fn level(level: i8) -> Result<Self> {
        if (0..=I_MAX).contains(&level) {
            Ok(QueueState(level))
        } else {
            Err(Error::Domain(format!("internal level {level} outside 0..=4")))
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn is_active(self) -> bool {
        self == Self::ACTIVE
    }

    pub fn is_waiting_active(self) -> bool {
        self == Self::WAITING_ACTIVE
    }

    pub fn is_internal(self) -> bool {
        (0..=I_MAX).contains(&self.0)
    }
}

impl fmt::Display for QueueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::ACTIVE => f.write_str("A"),
            Self::WAITING_ACTIVE => f.write_str("WA"),
            QueueState(v) => write!(f, "{v}"),
        }
    }
}

/// Shape of the dwell curve `y_min + (y_max - y_min) * a^x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellParams<T> {
    pub a: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> DwellParams<T> {
    pub fn new(a: T, y_min: T, y_max: T) -> Result<Self> {
        if !(a > T::zero() && a < T::one()) {
            return Err(Error::Config(format!("dwell base a={a} must lie in (0,1)")));
        }
        if !(y_min > T::zero() && y_max > y_min) {
            return Err(Error::Config(format!(
                "dwell bounds need 0 < y_min < y_max, got y_min={y_min} y_max={y_max}"
            )));
        }
        Ok(DwellParams { a, y_min, y_max })
    }
}

impl<T: Scalar> Default for DwellParams<T> {
    /// a = 4.5/5, y_min = 0.5 s, y_max = 15 s.
    fn default() -> Self {
        DwellParams {
            a: T::lit(4.5 / 5.0),
            y_min: T::lit(0.5),
            y_max: T::lit(15.0),
        }
    }
}

/// What the camera (or the simulator standing in for it) reports for one queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueObservation<T> {
    pub entry_density: T,
    pub entry_length_m: T,
    pub exit_density: T,
    pub exit_length_m: T,
    pub emergency_present: bool,
}

impl<T: Scalar> QueueObservation<T> {
    /// Densities are clamped into `[0, 1]`; lengths must be positive.
    pub fn new(
        entry_density: T,
        entry_length_m: T,
        exit_density: T,
        exit_length_m: T,
        emergency_present: bool,
    ) -> Result<Self> {
        if !(entry_length_m > T::zero() && exit_length_m > T::zero()) {
            return Err(Error::Config("queue lengths must be positive".into()));
        }
        let clamp = |d: T| d.max(T::zero()).min(T::one());
        Ok(QueueObservation {
            entry_density: clamp(entry_density),
            entry_length_m,
            exit_density: clamp(exit_density),
            exit_length_m,
            emergency_present,
        })
    }
}

/// Seconds needed to empty the queue: the smaller of free exit space and
/// occupied entry space, crossed at `v_cross`.
pub fn time_to_empty<T: Scalar>(obs: &QueueObservation<T>, v_cross: T) -> Result<T> {
    if !(v_cross > T::zero()) {
        return Err(Error::Config(format!("crossing speed {v_cross} must be positive")));
    }
    let free_exit = (T::one() - obs.exit_density) * obs.exit_length_m;
    let occupied_entry = obs.entry_density * obs.entry_length_m;
    Ok(free_exit.min(occupied_entry).max(T::zero()) / v_cross)
}

/// Dwell time between level increments for a cycle whose predecessor needed `x_prev` seconds.
pub fn dwell_time<T: Scalar>(x_prev: T, params: &DwellParams<T>) -> Result<T> {
    if !(x_prev >= T::zero()) {
        return Err(Error::Domain(format!("previous empty time {x_prev} is negative")));
    }
    Ok(params.y_min + (params.y_max - params.y_min) * params.a.powf(x_prev))
}

/// Controller-side state of one entry queue.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueDynamics<T> {
    pub lane: LaneId,
    pub state: QueueState,
    pub cycle_index: u64,
    /// Seconds per level for the current cycle.
    pub dwell_y: T,
    /// When the level last increased (or the cycle started).
    pub level_timer_start: T,
    pub emergency_flag: bool,
    /// Empty time granted in the previous cycle.
    pub last_empty_time_x: T,
}

impl<T: Scalar> QueueDynamics<T> {
    /// Cold start: no history, so the first dwell is `y_max`.
    pub fn new(lane: LaneId, params: &DwellParams<T>, now: T) -> Self {
        QueueDynamics {
            lane,
            state: QueueState::ZERO,
            cycle_index: 0,
            dwell_y: params.y_max,
            level_timer_start: now,
            emergency_flag: false,
            last_empty_time_x: T::zero(),
        }
    }

    /// Level escalation. Active and waiting-active are left to the controller.
    pub fn update_internal_state(&mut self, now: T, obs: &QueueObservation<T>) -> QueueState {
        if !self.state.is_internal() {
            return self.state;
        }
        let elapsed = now - self.level_timer_start >= self.dwell_y;
        if elapsed && obs.entry_density != T::zero() {
            self.state = QueueState((self.state.0 + 1).min(I_MAX));
            self.level_timer_start = now;
        }
        self.state
    }

    /// Applies a pending emergency event, then clears it.
    pub fn handle_emergency(&mut self) -> QueueState {
        if self.emergency_flag {
            if self.state.is_internal() {
                self.state = if self.state.0 < I_MAX {
                    QueueState::MAX_LEVEL
                } else {
                    QueueState::WAITING_ACTIVE
                };
            }
            self.emergency_flag = false;
        }
        self.state
    }

    /// Begins the next cycle after a green: new dwell from `x_prev`, state `reset_to`.
    pub fn start_cycle(&mut self, x_prev: T, params: &DwellParams<T>, now: T, reset_to: QueueState) -> Result<()> {
        self.dwell_y = dwell_time(x_prev, params)?;
        self.last_empty_time_x = x_prev;
        self.cycle_index += 1;
        self.state = reset_to;
        self.level_timer_start = now;
        self.emergency_flag = false;
        Ok(())
    }
}
