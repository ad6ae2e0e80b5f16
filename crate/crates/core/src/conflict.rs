//! Static conflict relation between the twelve movements.

use std::fmt;

use crate::error::{Error, Result};
use crate::lane::{LaneId, LANE_COUNT};

/// Conflicting movement pairs, each listed once (upper triangle in lane order).
const DEFAULT_CONFLICTS: [(&str, &[&str]); 9] = [
    ("WR", &["EL", "NF"]),
    ("WF", &["EL", "NF", "NL", "SR", "SF", "SL"]),
    ("WL", &["ER", "EF", "NF", "NL", "SF", "SL"]),
    ("ER", &["SF"]),
    ("EF", &["NR", "NF", "NL", "SF", "SL"]),
    ("EL", &["NF", "NL", "SF", "SL"]),
    ("NR", &["SL"]),
    ("NF", &["SL"]),
    ("NL", &["SR", "SF"]),
];

/// Symmetric 12×12 table, `true` where two movements may collide.
///
/// Rows are bitmasks indexed by lane index. The diagonal is never set.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConflictRelation {
    rows: [u16; LANE_COUNT],
}

impl ConflictRelation {
    /// A relation with no conflicts at all.
    pub fn empty() -> Self {
        ConflictRelation { rows: [0; LANE_COUNT] }
    }

    pub fn conflicts(&self, a: LaneId, b: LaneId) -> Result<bool> {
        if a == b {
            return Err(Error::IllegalCase(a));
        }
        Ok(self.conflicts_idx(a.index(), b.index()))
    }

    /// Index form used on hot paths; `a == b` reads as "no conflict".
    #[inline]
    pub fn conflicts_idx(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    /// Bitmask of lanes conflicting with `lane`.
    #[inline]
    pub fn row_mask(&self, lane: usize) -> u16 {
        self.rows[lane]
    }

    /// Returns a copy with the `(a, b)` cell (and its mirror) set to `conflict`.
    pub fn with_entry(&self, a: LaneId, b: LaneId, conflict: bool) -> Result<Self> {
        if a == b {
            return Err(Error::IllegalCase(a));
        }
        let mut out = *self;
        let (i, j) = (a.index(), b.index());
        if conflict {
            out.rows[i] |= 1 << j;
            out.rows[j] |= 1 << i;
        } else {
            out.rows[i] &= !(1 << j);
            out.rows[j] &= !(1 << i);
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..LANE_COUNT).all(|a| (0..LANE_COUNT).all(|b| self.conflicts_idx(a, b) == self.conflicts_idx(b, a)))
    }

    /// Number of conflicting unordered pairs.
    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// True when no two lanes of `mask` conflict.
    pub fn is_conflict_free(&self, mask: u16) -> bool {
        (0..LANE_COUNT)
            .filter(|&i| mask >> i & 1 == 1)
            .all(|i| self.rows[i] & mask == 0)
    }

    /// Parses the text fixture: 12 rows of 12 cells, `.` compatible, `X` conflict, `#` diagonal.
    pub fn parse_fixture(text: &str) -> Result<Self> {
        let rows: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim_end()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        if rows.len() != LANE_COUNT {
            return Err(Error::Fixture {
                line: rows.len(),
                msg: format!("expected {LANE_COUNT} rows, found {}", rows.len()),
            });
        }
        let mut rel = ConflictRelation::empty();
        for (i, (line, row)) in rows.iter().enumerate() {
            let cells: Vec<char> = row.chars().collect();
            if cells.len() != LANE_COUNT {
                return Err(Error::Fixture {
                    line: *line,
                    msg: format!("expected {LANE_COUNT} cells, found {}", cells.len()),
                });
            }
            for (j, c) in cells.into_iter().enumerate() {
                match (c, i == j) {
                    ('#', true) => {}
                    ('X', false) => rel.rows[i] |= 1 << j,
                    ('.', false) => {}
                    _ => {
                        return Err(Error::Fixture {
                            line: *line,
                            msg: format!("unexpected cell `{c}` at column {}", j + 1),
                        })
                    }
                }
            }
        }
        if !rel.is_symmetric() {
            return Err(Error::Fixture {
                line: 0,
                msg: "table is not symmetric".into(),
            });
        }
        Ok(rel)
    }

    pub fn to_fixture(&self) -> String {
        let mut out = String::with_capacity(LANE_COUNT * (LANE_COUNT + 1));
        for i in 0..LANE_COUNT {
            for j in 0..LANE_COUNT {
                out.push(if i == j {
                    '#'
                } else if self.conflicts_idx(i, j) {
                    'X'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }
}

impl Default for ConflictRelation {
    fn default() -> Self {
        default_conflict_relation()
    }
}

impl fmt::Debug for ConflictRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ConflictRelation {{")?;
        for line in self.to_fixture().lines() {
            writeln!(f, "  {line}")?;
        }
        write!(f, "}}")
    }
}

/// The road-code relation of a standard right-hand-traffic four-way junction.
pub fn default_conflict_relation() -> ConflictRelation {
    let mut rel = ConflictRelation::empty();
    for (a, bs) in DEFAULT_CONFLICTS {
        let a: LaneId = a.parse().expect("static label");
        for b in bs {
            let b: LaneId = b.parse().expect("static label");
            rel = rel.with_entry(a, b, true).expect("distinct labels");
        }
    }
    debug_assert!(rel.is_symmetric());
    rel
}
