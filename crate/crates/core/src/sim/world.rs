//! The discrete-time world. One call to [`World::step`] is one second:
//!
//! 1. scripted rule changes due this second take effect;
//! 2. arrivals join the tail of their entry queue (or are turned away when it is full);
//! 3. the controller sees the observations and releases / grants lanes;
//! 4. green lanes discharge from the head while their exit has room;
//! 5. exits drain;
//! 6. safety counters are updated.

use std::collections::VecDeque;

use crate::conflict::ConflictRelation;
use crate::error::{Error, Result};
use crate::lane::{LaneId, Road, LANE_COUNT};
use crate::queue::{time_to_empty, QueueObservation};
use crate::scheduler::RuleChange;
use crate::sim::config::SimConfig;
use crate::sim::controller::{Controller, ControllerKind, Decision, TickView};
use crate::sim::metrics::{Counters, DepartureRecord, MetricsRecord};
use crate::sim::rng::ArrivalStreams;
use crate::vehicle::{Vehicle, VehicleClass};

#[derive(Debug, Clone, PartialEq)]
pub struct EntryQueueSim {
    pub lane: LaneId,
    pub vehicles: VecDeque<Vehicle>,
    pub occupied_m: f64,
}

impl EntryQueueSim {
    fn new(lane: LaneId) -> Self {
        EntryQueueSim {
            lane,
            vehicles: VecDeque::new(),
            occupied_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitState {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitQueueSim {
    pub road: Road,
    pub occupied_m: f64,
}

impl ExitQueueSim {
    pub fn state(&self, exit_length_m: f64) -> ExitState {
        if self.occupied_m >= exit_length_m {
            ExitState::Closed
        } else {
            ExitState::Open
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Signal {
    Red,
    Green {
        granted_at: u64,
        relation: ConflictRelation,
        credit: f64,
    },
    Clearing {
        until: u64,
    },
}

pub struct World {
    cfg: SimConfig,
    now: u64,
    relation: ConflictRelation,
    rules: VecDeque<RuleChange>,
    entries: Vec<EntryQueueSim>,
    exits: [ExitQueueSim; 4],
    signals: [Signal; LANE_COUNT],
    arrivals: ArrivalStreams,
    next_id: u64,
    counters: Counters,
    log: Vec<DepartureRecord>,
    max_wait: [u64; LANE_COUNT],
}

impl World {
    pub fn new(cfg: SimConfig, rules: &[RuleChange]) -> Result<Self> {
        cfg.validate()?;
        let mut rules = rules.to_vec();
        rules.sort_by_key(|r| r.step);
        Ok(World {
            arrivals: ArrivalStreams::new(cfg.seed, cfg.lambda_cv, cfg.lambda_ev, &cfg.lane_weights)?,
            cfg,
            now: 0,
            relation: ConflictRelation::default(),
            rules: rules.into(),
            entries: LaneId::ALL.iter().map(|&l| EntryQueueSim::new(l)).collect(),
            exits: Road::ALL.map(|road| ExitQueueSim { road, occupied_m: 0.0 }),
            signals: [Signal::Red; LANE_COUNT],
            next_id: 0,
            counters: Counters::default(),
            log: Vec::new(),
            max_wait: [0; LANE_COUNT],
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn relation(&self) -> &ConflictRelation {
        &self.relation
    }

    pub fn entry(&self, lane: LaneId) -> &EntryQueueSim {
        &self.entries[lane.index()]
    }

    pub fn exit(&self, road: Road) -> &ExitQueueSim {
        &self.exits[road.index()]
    }

    pub fn green_mask(&self) -> u16 {
        self.mask(|s| matches!(s, Signal::Green { .. }))
    }

    pub fn clearing_mask(&self) -> u16 {
        self.mask(|s| matches!(s, Signal::Clearing { .. }))
    }

    fn mask(&self, f: impl Fn(&Signal) -> bool) -> u16 {
        (0..LANE_COUNT)
            .filter(|&i| f(&self.signals[i]))
            .fold(0, |m, i| m | 1 << i)
    }

    pub fn departures(&self) -> &[DepartureRecord] {
        &self.log
    }

    pub fn arrivals_accepted(&self) -> u64 {
        self.counters.arrivals_accepted
    }

    pub fn queued(&self) -> u64 {
        self.entries.iter().map(|e| e.vehicles.len() as u64).sum()
    }

    pub fn collisions(&self) -> u64 {
        self.counters.collisions
    }

    pub fn empty_green_grants(&self) -> u64 {
        self.counters.empty_green_grants
    }

    /// Adds a vehicle at the tail of `lane` now. Returns `false` when the lane is full.
    pub fn inject(&mut self, class: VehicleClass, lane: LaneId) -> bool {
        let id = self.next_id;
        self.next_id += 1;
        let len = self.cfg.vehicle_length_m;
        let entry = &mut self.entries[lane.index()];
        if entry.occupied_m + len > self.cfg.lane_length_m + 1e-9 {
            self.counters.spillback_rejections += 1;
            return false;
        }
        entry.vehicles.push_back(Vehicle::new(id, class, lane, len, self.now));
        entry.occupied_m += len;
        self.counters.arrivals_accepted += 1;
        true
    }

    pub fn observation(&self, lane: LaneId) -> QueueObservation<f64> {
        let e = &self.entries[lane.index()];
        let x = &self.exits[lane.exit_road().index()];
        QueueObservation::new(
            e.occupied_m / self.cfg.lane_length_m,
            self.cfg.lane_length_m,
            x.occupied_m / self.cfg.exit_length_m,
            self.cfg.exit_length_m,
            e.vehicles.iter().any(|v| v.class == VehicleClass::Emergency),
        )
        .expect("lengths validated with the config")
    }

    fn view(&self, emergency_arrivals: [bool; LANE_COUNT]) -> TickView {
        TickView {
            now: self.now,
            relation: self.relation,
            observations: LaneId::ALL.map(|l| self.observation(l)),
            emergency_arrivals,
            queue_len: std::array::from_fn(|i| self.entries[i].vehicles.len()),
            green: self.green_mask(),
            clearing: self.clearing_mask(),
        }
    }

    /// Advances one second under `controller`.
    pub fn step(&mut self, controller: &mut dyn Controller) -> Result<()> {
        while self.rules.front().is_some_and(|r| r.step <= self.now) {
            let r = self.rules.pop_front().expect("checked");
            self.relation = self.relation.with_entry(r.a, r.b, r.conflict)?;
        }

        let mut ev_arrivals = [false; LANE_COUNT];
        for (class, lane) in self.arrivals.next_second() {
            let accepted = self.inject(class, lane);
            if accepted && class == VehicleClass::Emergency && self.cfg.scenario.emergency_priority() {
                ev_arrivals[lane.index()] = true;
            }
        }

        for i in 0..LANE_COUNT {
            if let Signal::Clearing { until } = self.signals[i] {
                if self.now >= until {
                    self.signals[i] = Signal::Red;
                }
            }
        }

        let view = self.view(ev_arrivals);
        let decision = controller.decide(&view)?;
        self.apply(&decision)?;
        self.count_collisions();
        self.discharge()?;
        let drain = self.cfg.exit_drain_rate();
        for x in &mut self.exits {
            x.occupied_m = (x.occupied_m - drain).max(0.0);
        }
        self.now += 1;
        Ok(())
    }

    fn apply(&mut self, d: &Decision) -> Result<()> {
        for l in &d.release {
            let i = l.index();
            if matches!(self.signals[i], Signal::Green { .. }) {
                self.signals[i] = if self.cfg.clearance_s > 0 {
                    Signal::Clearing {
                        until: self.now + self.cfg.clearance_s,
                    }
                } else {
                    Signal::Red
                };
            }
        }
        for l in &d.grant {
            let i = l.index();
            if matches!(self.signals[i], Signal::Green { .. }) {
                return Err(Error::InvariantViolation(format!("{l} granted while already green")));
            }
            let x = time_to_empty(&self.observation(*l), self.cfg.v_cross)?;
            if x <= 0.0 {
                self.counters.empty_green_grants += 1;
            }
            self.signals[i] = Signal::Green {
                granted_at: self.now,
                relation: self.relation,
                credit: 0.0,
            };
        }
        Ok(())
    }

    fn count_collisions(&mut self) {
        for a in 0..LANE_COUNT {
            let Signal::Green {
                granted_at: ta,
                relation: ra,
                ..
            } = self.signals[a]
            else {
                continue;
            };
            for b in a + 1..LANE_COUNT {
                let Signal::Green {
                    granted_at: tb,
                    relation: rb,
                    ..
                } = self.signals[b]
                else {
                    continue;
                };
                // judged by the relation the later of the two was granted under
                let rel = if tb >= ta { rb } else { ra };
                if rel.conflicts_idx(a, b) {
                    self.counters.collisions += 1;
                }
            }
        }
    }

    fn discharge(&mut self) -> Result<()> {
        let rate = self.cfg.discharge_rate();
        for i in 0..LANE_COUNT {
            let Signal::Green { credit, .. } = &mut self.signals[i] else {
                continue;
            };
            *credit += rate;
            let entry = &mut self.entries[i];
            let exit = &mut self.exits[entry.lane.exit_road().index()];
            while *credit >= 1.0 {
                let Some(head) = entry.vehicles.front() else {
                    break;
                };
                if exit.occupied_m + head.length_m > self.cfg.exit_length_m + 1e-9 {
                    break;
                }
                let mut v = entry.vehicles.pop_front().expect("head exists");
                v.depart(self.now)?;
                entry.occupied_m = (entry.occupied_m - v.length_m).max(0.0);
                if entry.vehicles.is_empty() {
                    entry.occupied_m = 0.0;
                }
                exit.occupied_m += v.length_m;
                *credit -= 1.0;
                let wait = self.now - v.arrival_step;
                self.max_wait[i] = self.max_wait[i].max(wait);
                self.log.push(DepartureRecord {
                    id: v.id,
                    class: v.class,
                    lane: v.lane,
                    arrival_step: v.arrival_step,
                    departure_step: self.now,
                });
            }
            // whole vehicles of unused capacity are lost, fractions carry over
            *credit = credit.fract();
        }
        Ok(())
    }

    /// Closes the run and computes metrics; queued vehicles count toward max wait.
    pub fn finish(self) -> MetricsRecord {
        let mut max_wait = self.max_wait;
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(front) = e.vehicles.front() {
                max_wait[i] = max_wait[i].max(self.now - front.arrival_step);
            }
        }
        MetricsRecord::from_log(self.log, self.cfg.metrics_first_n, self.counters, max_wait)
    }
}

/// Runs `cfg.steps` seconds from an empty world with the given controller.
pub fn run_with(cfg: &SimConfig, kind: ControllerKind, rules: &[RuleChange]) -> Result<MetricsRecord> {
    cfg.validate()?;
    let mut controller = kind.build(cfg)?;
    let mut world = World::new(cfg.clone(), rules)?;
    for _ in 0..cfg.steps {
        world.step(controller.as_mut())?;
    }
    Ok(world.finish())
}

/// Runs the queue-state controller.
pub fn run(cfg: &SimConfig) -> Result<MetricsRecord> {
    run_with(cfg, ControllerKind::Adaptive, &[])
}
