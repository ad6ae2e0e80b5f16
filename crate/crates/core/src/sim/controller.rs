//! Signal controllers driven by the simulator once per second.

use crate::conflict::ConflictRelation;
use crate::error::{Error, Result};
use crate::lane::{LaneId, LANE_COUNT};
use crate::queue::{time_to_empty, DwellParams, QueueDynamics, QueueObservation, QueueState};
use crate::scheduler::{end_green_lane, grant_green, ConflictMatrix, LaneGrant};
use crate::sim::config::SimConfig;

/// What a controller sees at the start of a second, after arrivals.
#[derive(Debug, Clone)]
pub struct TickView {
    pub now: u64,
    pub relation: ConflictRelation,
    pub observations: [QueueObservation<f64>; LANE_COUNT],
    /// Emergency vehicle joined this lane this second (only reported when priority is on).
    pub emergency_arrivals: [bool; LANE_COUNT],
    pub queue_len: [usize; LANE_COUNT],
    /// Lanes currently green.
    pub green: u16,
    /// Lanes in their all-red clearance after a green.
    pub clearing: u16,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decision {
    pub release: Vec<LaneId>,
    pub grant: Vec<LaneId>,
}

pub trait Controller: Send {
    fn name(&self) -> &'static str;
    fn decide(&mut self, view: &TickView) -> Result<Decision>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControllerKind {
    Adaptive,
    FixedCycle,
    GreedyLongest,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Adaptive => "adaptive",
            ControllerKind::FixedCycle => "fixed",
            ControllerKind::GreedyLongest => "greedy",
        }
    }

    pub fn build(self, cfg: &SimConfig) -> Result<Box<dyn Controller>> {
        Ok(match self {
            ControllerKind::Adaptive => Box::new(AdaptiveController::new(cfg)?),
            ControllerKind::FixedCycle => Box::new(FixedCycleController::new(cfg, default_phase_groups())?),
            ControllerKind::GreedyLongest => Box::new(GreedyLongestController::new(cfg)?),
        })
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adaptive" => Ok(ControllerKind::Adaptive),
            "fixed" | "fixedcycle" | "fixed_cycle" => Ok(ControllerKind::FixedCycle),
            "greedy" | "greedylongest" | "greedy_longest" => Ok(ControllerKind::GreedyLongest),
            other => Err(Error::Config(format!("unknown controller `{other}`"))),
        }
    }
}

fn mask_of(lanes: &[LaneId]) -> u16 {
    lanes.iter().fold(0, |m, l| m | 1 << l.index())
}

fn blocked_by(relation: &ConflictRelation, lanes: u16) -> u16 {
    (0..LANE_COUNT)
        .filter(|&i| lanes >> i & 1 == 1)
        .fold(lanes, |m, i| m | relation.row_mask(i))
}

/// The queue-state controller: per-lane priority automata feeding the matrix scheduler.
pub struct AdaptiveController {
    queues: Vec<QueueDynamics<f64>>,
    matrix: ConflictMatrix,
    grants: [Option<(u64, LaneGrant<f64>)>; LANE_COUNT],
    params: DwellParams<f64>,
    t_max: f64,
    v_cross: f64,
}

impl AdaptiveController {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let params = DwellParams::new(cfg.dwell.a, cfg.dwell.y_min, cfg.dwell.y_max)?;
        Ok(AdaptiveController {
            queues: LaneId::ALL
                .iter()
                .map(|&l| QueueDynamics::new(l, &params, 0.0))
                .collect(),
            matrix: ConflictMatrix::new(ConflictRelation::default()),
            grants: [None; LANE_COUNT],
            params,
            t_max: cfg.t_max,
            v_cross: cfg.v_cross,
        })
    }

    pub fn queues(&self) -> &[QueueDynamics<f64>] {
        &self.queues
    }

    pub fn matrix(&self) -> &ConflictMatrix {
        &self.matrix
    }
}

impl Controller for AdaptiveController {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn decide(&mut self, view: &TickView) -> Result<Decision> {
        let now = view.now as f64;
        self.matrix.relation = view.relation;

        // Each queue runs its own automaton; none reads another's state.
        for (i, q) in self.queues.iter_mut().enumerate() {
            if view.emergency_arrivals[i] {
                q.emergency_flag = true;
            }
            q.handle_emergency();
            q.update_internal_state(now, &view.observations[i]);
        }

        let mut decision = Decision::default();
        for i in 0..LANE_COUNT {
            let Some((granted_at, grant)) = self.grants[i] else {
                continue;
            };
            let expired = now - granted_at as f64 >= grant.budget;
            if expired || view.queue_len[i] == 0 {
                end_green_lane(&grant, self.t_max, &mut self.queues[i], now, &self.params)?;
                self.grants[i] = None;
                decision.release.push(LaneId::ALL[i]);
            }
        }

        let any_active = self.grants.iter().any(Option::is_some);
        if !decision.release.is_empty() || !any_active {
            let mut x = [0.0; LANE_COUNT];
            for i in 0..LANE_COUNT {
                x[i] = time_to_empty(&view.observations[i], self.v_cross)?;
            }
            self.matrix.update_matrix(&self.queues);
            let sel = self
                .matrix
                .select_open_set_with(blocked_by(&view.relation, view.clearing), |l| x[l.index()] > 0.0);
            // Only a queue holding vehicles has earned a waiting-active slot.
            for l in &sel.marked_waiting {
                let q = &mut self.queues[l.index()];
                if view.queue_len[l.index()] > 0 && q.state.is_internal() {
                    q.state = QueueState::WAITING_ACTIVE;
                }
            }
            if !sel.open.is_empty() {
                let phase = grant_green(&mut self.matrix, &sel.open, &mut self.queues, now, self.t_max, |l| {
                    x[l.index()]
                })?;
                for g in phase.grants {
                    self.grants[g.lane.index()] = Some((view.now, g));
                    decision.grant.push(g.lane);
                }
            }
        }
        Ok(decision)
    }
}

/// Serves the conflict-free set seeded by the longest queue; no priority levels.
pub struct GreedyLongestController {
    grants: [Option<(u64, f64)>; LANE_COUNT],
    t_max: f64,
    v_cross: f64,
}

impl GreedyLongestController {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        Ok(GreedyLongestController {
            grants: [None; LANE_COUNT],
            t_max: cfg.t_max,
            v_cross: cfg.v_cross,
        })
    }
}

impl Controller for GreedyLongestController {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn decide(&mut self, view: &TickView) -> Result<Decision> {
        let now = view.now as f64;
        let mut decision = Decision::default();
        for i in 0..LANE_COUNT {
            if let Some((at, budget)) = self.grants[i] {
                if now - at as f64 >= budget || view.queue_len[i] == 0 {
                    self.grants[i] = None;
                    decision.release.push(LaneId::ALL[i]);
                }
            }
        }
        let active: u16 = (0..LANE_COUNT)
            .filter(|&i| self.grants[i].is_some())
            .fold(0, |m, i| m | 1 << i);
        if decision.release.is_empty() && active != 0 {
            return Ok(decision);
        }
        let mut x = [0.0; LANE_COUNT];
        for i in 0..LANE_COUNT {
            x[i] = time_to_empty(&view.observations[i], self.v_cross)?;
        }
        let mut order: [usize; LANE_COUNT] = std::array::from_fn(|i| i);
        order.sort_by(|&a, &b| view.queue_len[b].cmp(&view.queue_len[a]).then(a.cmp(&b)));
        let mut forbidden = blocked_by(&view.relation, active | view.clearing);
        for i in order {
            if forbidden >> i & 1 == 1 || x[i] <= 0.0 {
                continue;
            }
            forbidden |= 1 << i | view.relation.row_mask(i);
            self.grants[i] = Some((view.now, x[i].min(self.t_max)));
            decision.grant.push(LaneId::ALL[i]);
        }
        Ok(decision)
    }
}

/// Pre-timed plan: phase groups in turn, each green for `t_max` seconds,
/// separated by the configured all-red clearance.
pub struct FixedCycleController {
    groups: Vec<u16>,
    current: Option<usize>,
    started: u64,
    /// Next group and the second it may start.
    pending: Option<(usize, u64)>,
    green_s: f64,
    clearance_s: u64,
}

impl FixedCycleController {
    pub fn new(cfg: &SimConfig, groups: Vec<Vec<LaneId>>) -> Result<Self> {
        let relation = ConflictRelation::default();
        let masks: Vec<u16> = groups.iter().map(|g| mask_of(g)).collect();
        if masks.is_empty() || masks.iter().any(|&m| m == 0 || !relation.is_conflict_free(m)) {
            return Err(Error::Config("phase groups must be non-empty and conflict-free".into()));
        }
        if masks.iter().fold(0, |a, m| a | m) != (1 << LANE_COUNT) - 1 {
            return Err(Error::Config("phase groups must cover all lanes".into()));
        }
        Ok(FixedCycleController {
            groups: masks,
            current: None,
            started: 0,
            pending: Some((0, 0)),
            green_s: cfg.t_max,
            clearance_s: cfg.clearance_s,
        })
    }

    fn lanes(mask: u16) -> impl Iterator<Item = LaneId> {
        (0..LANE_COUNT)
            .filter(move |&i| mask >> i & 1 == 1)
            .map(|i| LaneId::ALL[i])
    }
}

impl Controller for FixedCycleController {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn decide(&mut self, view: &TickView) -> Result<Decision> {
        let mut decision = Decision::default();
        if let Some(g) = self.current {
            if (view.now - self.started) as f64 >= self.green_s {
                decision.release.extend(Self::lanes(self.groups[g]));
                self.current = None;
                self.pending = Some(((g + 1) % self.groups.len(), view.now + self.clearance_s));
            }
        }
        if let Some((next, from)) = self.pending {
            if view.now >= from {
                decision.grant.extend(Self::lanes(self.groups[next]));
                self.current = Some(next);
                self.pending = None;
                self.started = view.now;
            }
        }
        Ok(decision)
    }
}

/// Partitions the lanes into conflict-free groups: each lane, in index order,
/// joins the first group it is compatible with, or opens a new one.
pub fn greedy_phase_groups(relation: &ConflictRelation) -> Vec<Vec<LaneId>> {
    let mut groups: Vec<u16> = Vec::new();
    for i in 0..LANE_COUNT {
        match groups.iter_mut().find(|g| relation.row_mask(i) & **g == 0) {
            Some(g) => *g |= 1 << i,
            None => groups.push(1 << i),
        }
    }
    groups
        .into_iter()
        .map(|g| FixedCycleController::lanes(g).collect())
        .collect()
}

const PHASE_GROUPS_FIXTURE: &str = include_str!("../../fixtures/fixed_cycle_groups.txt");

/// Phase groups of the fixed-cycle baseline, read from the checked-in fixture.
pub fn default_phase_groups() -> Vec<Vec<LaneId>> {
    parse_phase_groups(PHASE_GROUPS_FIXTURE).expect("valid phase group fixture")
}

/// One group per line, lanes separated by whitespace.
pub fn parse_phase_groups(text: &str) -> Result<Vec<Vec<LaneId>>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(str::parse).collect())
        .collect()
}
