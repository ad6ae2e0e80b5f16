//! The matrix view of the intersection and selection of the next green set.
//!
//! Off-diagonal cells are the static conflict relation, the diagonal carries
//! the live state of every queue. Selection only reads the diagonal and the
//! relation, so it is a pure function of a snapshot (plus the waiting-active
//! marks it writes back).

use std::fmt;
use std::str::FromStr;

use crate::conflict::ConflictRelation;
use crate::error::{Error, Result};
use crate::lane::{LaneId, LANE_COUNT};
use crate::queue::{DwellParams, QueueDynamics, QueueState, I_MAX};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConflictMatrix {
    pub relation: ConflictRelation,
    pub diagonal: [QueueState; LANE_COUNT],
}

/// Outcome of one selection round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    /// Lanes to turn green, in the order they were picked (seed first).
    pub open: Vec<LaneId>,
    /// Lanes scanned ahead of the seed that could not open; their diagonal is now WA.
    pub marked_waiting: Vec<LaneId>,
}

impl ConflictMatrix {
    pub fn new(relation: ConflictRelation) -> Self {
        ConflictMatrix {
            relation,
            diagonal: [QueueState::ZERO; LANE_COUNT],
        }
    }

    pub fn state(&self, lane: LaneId) -> QueueState {
        self.diagonal[lane.index()]
    }

    /// Copies every queue's state onto the diagonal.
    pub fn update_matrix<T: Scalar>(&mut self, queues: &[QueueDynamics<T>]) {
        for q in queues {
            self.diagonal[q.lane.index()] = q.state;
        }
    }

    /// Lanes in selection order: highest diagonal first, ties by ascending lane index.
    pub fn priority_order(&self) -> [usize; LANE_COUNT] {
        let mut order: [usize; LANE_COUNT] = std::array::from_fn(|i| i);
        order.sort_by(|&a, &b| self.diagonal[b].cmp(&self.diagonal[a]).then(a.cmp(&b)));
        order
    }

    /// Lanes currently green plus everything that conflicts with them.
    pub fn blocked_mask(&self) -> u16 {
        let mut mask = 0u16;
        for i in 0..LANE_COUNT {
            if self.diagonal[i].is_active() {
                mask |= 1 << i | self.relation.row_mask(i);
            }
        }
        mask
    }

    /// Picks the set of lanes to open next.
    ///
    /// The seed is the highest-priority lane that is neither green nor blocked
    /// by a green lane and for which `can_open` holds. Lanes scanned before the
    /// seed that fail `can_open` are marked WA. The set is then grown greedily
    /// in priority order with openable lanes compatible with everything picked
    /// so far. An empty result means no phase this round.
    pub fn select_open_set<F>(&mut self, can_open: F) -> Selection
    where
        F: FnMut(LaneId) -> bool,
    {
        self.select_open_set_with(0, can_open)
    }

    /// As [`select_open_set`](Self::select_open_set), with `extra_blocked` lanes
    /// also kept out (e.g. lanes still clearing the junction).
    pub fn select_open_set_with<F>(&mut self, extra_blocked: u16, mut can_open: F) -> Selection
    where
        F: FnMut(LaneId) -> bool,
    {
        let blocked = self.blocked_mask() | extra_blocked;
        let order = self.priority_order();
        let mut sel = Selection::default();

        // Lanes scanned while looking for the seed are consumed from `rest`,
        // which keeps them out of the extension pass.
        let mut rest = order.iter().copied().filter(|&i| blocked >> i & 1 == 0);
        let seed = loop {
            let Some(q) = rest.next() else {
                return sel;
            };
            if can_open(LaneId::ALL[q]) {
                break q;
            }
            self.diagonal[q] = QueueState::WAITING_ACTIVE;
            sel.marked_waiting.push(LaneId::ALL[q]);
        };

        let mut open_mask = 1u16 << seed;
        let mut forbidden = self.relation.row_mask(seed);
        sel.open.push(LaneId::ALL[seed]);
        for p in rest {
            if forbidden >> p & 1 == 1 {
                continue;
            }
            if can_open(LaneId::ALL[p]) {
                open_mask |= 1 << p;
                forbidden |= self.relation.row_mask(p);
                sel.open.push(LaneId::ALL[p]);
            }
        }
        debug_assert!(self.relation.is_conflict_free(open_mask));
        sel
    }

    /// New matrix with one cell of the relation changed; the diagonal is kept.
    pub fn apply_rule_change(&self, a: LaneId, b: LaneId, conflict: bool) -> Result<ConflictMatrix> {
        Ok(ConflictMatrix {
            relation: self.relation.with_entry(a, b, conflict)?,
            diagonal: self.diagonal,
        })
    }
}

impl fmt::Display for ConflictMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "    ")?;
        for l in LaneId::ALL {
            write!(f, "{l:>3}")?;
        }
        writeln!(f)?;
        for (i, row) in LaneId::ALL.iter().enumerate() {
            write!(f, "{row:>3} ")?;
            for j in 0..LANE_COUNT {
                if i == j {
                    write!(f, "{:>3}", self.diagonal[i].to_string())?;
                } else if self.relation.conflicts_idx(i, j) {
                    write!(f, "{:>3}", "X")?;
                } else {
                    write!(f, "{:>3}", "0")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Green time granted to one lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneGrant<T> {
    pub lane: LaneId,
    /// Empty time measured at grant.
    pub x: T,
    /// `min(x, t_max)`.
    pub budget: T,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenPhase<T> {
    pub granted_at: T,
    pub t_max: T,
    pub grants: Vec<LaneGrant<T>>,
}

impl<T: Scalar> GreenPhase<T> {
    pub fn open_set(&self) -> impl Iterator<Item = LaneId> + '_ {
        self.grants.iter().map(|g| g.lane)
    }

    pub fn grant(&self, lane: LaneId) -> Option<&LaneGrant<T>> {
        self.grants.iter().find(|g| g.lane == lane)
    }
}

/// Turns `set` green: members become Active with budget `min(x, t_max)`.
///
/// `x_of` supplies the empty time of each member. Conflicting members or a
/// member with nothing to empty are rejected.
pub fn grant_green<T: Scalar, F>(
    m: &mut ConflictMatrix,
    set: &[LaneId],
    queues: &mut [QueueDynamics<T>],
    now: T,
    t_max: T,
    mut x_of: F,
) -> Result<GreenPhase<T>>
where
    F: FnMut(LaneId) -> T,
{
    if set.is_empty() {
        return Err(Error::InvariantViolation("empty green set".into()));
    }
    if !(t_max > T::zero()) {
        return Err(Error::Config(format!("t_max {t_max} must be positive")));
    }
    let mut mask = 0u16;
    for l in set {
        mask |= 1 << l.index();
    }
    // Members must not conflict with each other nor with lanes already green.
    if !m.relation.is_conflict_free(mask) || m.blocked_mask() & mask != 0 {
        return Err(Error::InvariantViolation(format!(
            "green set {} conflicts",
            set.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
        )));
    }
    let mut grants = Vec::with_capacity(set.len());
    for &lane in set {
        let x = x_of(lane);
        if !(x > T::zero()) {
            return Err(Error::InvariantViolation(format!(
                "{lane} granted with nothing to empty"
            )));
        }
        grants.push(LaneGrant {
            lane,
            x,
            budget: x.min(t_max),
            truncated: x > t_max,
        });
    }
    for &lane in set {
        m.diagonal[lane.index()] = QueueState::ACTIVE;
        if let Some(q) = queues.iter_mut().find(|q| q.lane == lane) {
            q.state = QueueState::ACTIVE;
        }
    }
    Ok(GreenPhase {
        granted_at: now,
        t_max,
        grants,
    })
}

/// Level a queue returns to after green: 0 when it fully discharged, otherwise
/// `round(I_max * (1 - t_max / x))`.
pub fn reset_level<T: Scalar>(x: T, t_max: T) -> QueueState {
    if x <= t_max {
        return QueueState::ZERO;
    }
    let raw = (T::lit(I_MAX as f64) * (T::one() - t_max / x)).round();
    let level = raw.max(T::zero()).min(T::lit(I_MAX as f64));
    QueueState::level(level.to_i8().unwrap_or(0)).expect("clamped level")
}

/// Ends green for one lane and opens its next cycle.
pub fn end_green_lane<T: Scalar>(
    grant: &LaneGrant<T>,
    t_max: T,
    queue: &mut QueueDynamics<T>,
    now: T,
    params: &DwellParams<T>,
) -> Result<QueueState> {
    let reset = reset_level(grant.x, t_max);
    queue.start_cycle(grant.x, params, now, reset)?;
    Ok(reset)
}

/// Ends green for every member of `phase`.
pub fn end_green<T: Scalar>(
    phase: &GreenPhase<T>,
    queues: &mut [QueueDynamics<T>],
    now: T,
    params: &DwellParams<T>,
) -> Result<()> {
    for g in &phase.grants {
        let q = queues
            .iter_mut()
            .find(|q| q.lane == g.lane)
            .ok_or_else(|| Error::InvariantViolation(format!("no queue for {}", g.lane)))?;
        end_green_lane(g, phase.t_max, q, now, params)?;
    }
    Ok(())
}

/// One line of a rule-change script: `<step> <laneA> <laneB> <conflict|clear>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleChange {
    pub step: u64,
    pub a: LaneId,
    pub b: LaneId,
    pub conflict: bool,
}

impl FromStr for RuleChange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [step, a, b, what] = parts[..] else {
            return Err(Error::Config(format!("rule change needs 4 fields: `{s}`")));
        };
        let step = step.parse().map_err(|_| Error::Config(format!("bad step `{step}`")))?;
        let conflict = match what {
            "conflict" => true,
            "clear" => false,
            other => return Err(Error::Config(format!("expected conflict|clear, got `{other}`"))),
        };
        let (a, b): (LaneId, LaneId) = (a.parse()?, b.parse()?);
        if a == b {
            return Err(Error::IllegalCase(a));
        }
        Ok(RuleChange { step, a, b, conflict })
    }
}

/// Parses a script; blank lines and `#` comments are skipped. Result is sorted by step.
pub fn parse_rule_script(text: &str) -> Result<Vec<RuleChange>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let rc = line.parse::<RuleChange>().map_err(|e| Error::Fixture {
            line: n + 1,
            msg: e.to_string(),
        })?;
        out.push(rc);
    }
    out.sort_by_key(|r| r.step);
    Ok(out)
}
