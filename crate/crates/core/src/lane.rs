//! Movement labels of a four-approach intersection.
//!
//! A lane is an `(approach, direction)` pair. `Road::W` with `Turn::F` is traffic
//! that arrives from the west and goes straight through to the east exit.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub const LANE_COUNT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Road {
    W,
    E,
    N,
    S,
}

impl Road {
    pub const ALL: [Road; 4] = [Road::W, Road::E, Road::N, Road::S];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Road::W => 'W',
            Road::E => 'E',
            Road::N => 'N',
            Road::S => 'S',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Turn {
    R,
    F,
    L,
}

impl Turn {
    pub fn as_char(self) -> char {
        match self {
            Turn::R => 'R',
            Turn::F => 'F',
            Turn::L => 'L',
        }
    }
}

/// One of the twelve entry queues, ordered WR, WF, WL, ER, EF, EL, NR, NF, NL, SR, SF, SL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaneId {
    pub path: Road,
    pub direction: Turn,
}

impl LaneId {
    pub const ALL: [LaneId; LANE_COUNT] = [
        LaneId::new(Road::W, Turn::R),
        LaneId::new(Road::W, Turn::F),
        LaneId::new(Road::W, Turn::L),
        LaneId::new(Road::E, Turn::R),
        LaneId::new(Road::E, Turn::F),
        LaneId::new(Road::E, Turn::L),
        LaneId::new(Road::N, Turn::R),
        LaneId::new(Road::N, Turn::F),
        LaneId::new(Road::N, Turn::L),
        LaneId::new(Road::S, Turn::R),
        LaneId::new(Road::S, Turn::F),
        LaneId::new(Road::S, Turn::L),
    ];

    pub const fn new(path: Road, direction: Turn) -> Self {
        LaneId { path, direction }
    }

    pub fn index(self) -> usize {
        lane_index(self)
    }

    pub fn from_index(idx: usize) -> Option<LaneId> {
        Self::ALL.get(idx).copied()
    }

    /// Outgoing road this movement discharges into (right-hand traffic).
    pub fn exit_road(self) -> Road {
        use Road::*;
        use Turn::*;
        match (self.path, self.direction) {
            (W, F) => E,
            (W, R) => S,
            (W, L) => N,
            (E, F) => W,
            (E, R) => N,
            (E, L) => S,
            (N, F) => S,
            (N, R) => W,
            (N, L) => E,
            (S, F) => N,
            (S, R) => E,
            (S, L) => W,
        }
    }
}

pub fn lane_index(lane: LaneId) -> usize {
    lane.path.index() * 3 + lane.direction as usize
}

impl fmt::Display for LaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.path.as_char(), self.direction.as_char())
    }
}

impl FromStr for LaneId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        LaneId::ALL
            .iter()
            .copied()
            .find(|l| l.to_string() == t)
            .ok_or_else(|| Error::Config(format!("unknown lane label `{s}`")))
    }
}
