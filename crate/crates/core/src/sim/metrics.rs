use crate::lane::{LaneId, LANE_COUNT};
use crate::vehicle::VehicleClass;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepartureRecord {
    pub id: u64,
    pub class: VehicleClass,
    pub lane: LaneId,
    pub arrival_step: u64,
    pub departure_step: u64,
}

impl DepartureRecord {
    pub fn wait(&self) -> u64 {
        self.departure_step - self.arrival_step
    }
}

/// Outputs of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    /// Average waits over the first `metrics_first_n` departures.
    pub awt_all: f64,
    pub awt_cv: f64,
    pub awt_ev: f64,
    /// Vehicles that crossed the stop line during the run.
    pub throughput: u64,
    /// Pairs of conflicting lanes green in the same second, summed over seconds.
    pub collisions: u64,
    /// Grants to a lane that had nothing able to cross.
    pub empty_green_grants: u64,
    pub spillback_rejections: u64,
    pub arrivals_accepted: u64,
    pub still_queued: u64,
    /// Longest wait seen per lane, counting vehicles still queued at the end.
    pub max_wait_per_lane: [u64; LANE_COUNT],
    /// Departures in the order they happened.
    pub per_vehicle_log: Vec<DepartureRecord>,
}

impl MetricsRecord {
    pub fn max_wait(&self) -> u64 {
        self.max_wait_per_lane.iter().copied().max().unwrap_or(0)
    }

    pub(crate) fn from_log(
        log: Vec<DepartureRecord>,
        first_n: usize,
        counters: Counters,
        max_wait_per_lane: [u64; LANE_COUNT],
    ) -> Self {
        let head = &log[..first_n.min(log.len())];
        let mean = |f: &dyn Fn(&DepartureRecord) -> bool| {
            let (sum, n) = head
                .iter()
                .filter(|r| f(r))
                .fold((0u64, 0u64), |(s, n), r| (s + r.wait(), n + 1));
            if n == 0 {
                0.0
            } else {
                sum as f64 / n as f64
            }
        };
        MetricsRecord {
            awt_all: mean(&|_| true),
            awt_cv: mean(&|r| r.class == VehicleClass::Classic),
            awt_ev: mean(&|r| r.class == VehicleClass::Emergency),
            throughput: log.len() as u64,
            collisions: counters.collisions,
            empty_green_grants: counters.empty_green_grants,
            spillback_rejections: counters.spillback_rejections,
            arrivals_accepted: counters.arrivals_accepted,
            still_queued: counters.arrivals_accepted - log.len() as u64,
            max_wait_per_lane,
            per_vehicle_log: log,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Counters {
    pub collisions: u64,
    pub empty_green_grants: u64,
    pub spillback_rejections: u64,
    pub arrivals_accepted: u64,
}
