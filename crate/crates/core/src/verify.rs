//! Built-in oracle checks, run by the `verify` command.
//!
//! Each check recomputes a result by an independent route: selection by
//! exhaustive search over all lane subsets, formulas by alternate
//! evaluation orders, and the conflict table from its text fixture.

use std::fmt;

use rand::Rng;

use crate::conflict::{default_conflict_relation, ConflictRelation};
use crate::lane::{LaneId, LANE_COUNT};
use crate::queue::{dwell_time, time_to_empty, DwellParams, QueueObservation, QueueState};
use crate::scheduler::ConflictMatrix;
use crate::sim::rng::stream;

pub const CONFLICT_FIXTURE: &str = include_str!("../fixtures/conflict_table.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: u64,
    pub failed: u64,
    pub note: String,
}

impl CheckResult {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::ok)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.ok() { "PASS" } else { "FAIL" };
            write!(f, "{tag} {:<28} passed={} failed={}", c.name, c.passed, c.failed)?;
            if !c.note.is_empty() {
                write!(f, " ({})", c.note)?;
            }
            writeln!(f)?;
        }
        let failed = self.checks.iter().filter(|c| !c.ok()).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Lexicographically greatest conflict-free subset of `eligible`, where lanes
/// earlier in `order` weigh more. Enumerates all 4096 subsets.
pub fn exhaustive_open_set(relation: &ConflictRelation, order: &[usize; LANE_COUNT], eligible: u16) -> u16 {
    let mut best = 0u16;
    let mut best_key = 0u32;
    for subset in 0u32..1 << LANE_COUNT {
        let subset = subset as u16;
        if subset & !eligible != 0 {
            continue;
        }
        let clash = (0..LANE_COUNT)
            .filter(|&i| subset >> i & 1 == 1)
            .any(|i| (0..LANE_COUNT).any(|j| j != i && subset >> j & 1 == 1 && relation.conflicts_idx(i, j)));
        if clash {
            continue;
        }
        let key = order
            .iter()
            .enumerate()
            .filter(|(_, &lane)| subset >> lane & 1 == 1)
            .fold(0u32, |k, (rank, _)| k | 1 << (LANE_COUNT - 1 - rank));
        if key > best_key {
            best_key = key;
            best = subset;
        }
    }
    best
}

/// Diagonal ordering recomputed by insertion: higher state first, lower index on ties.
fn ranking(diag: &[QueueState; LANE_COUNT]) -> [usize; LANE_COUNT] {
    let mut out: Vec<usize> = Vec::with_capacity(LANE_COUNT);
    for lane in 0..LANE_COUNT {
        let pos = out
            .iter()
            .position(|&o| diag[lane].value() > diag[o].value())
            .unwrap_or(out.len());
        out.insert(pos, lane);
    }
    out.try_into().expect("12 lanes")
}

fn scheduler_check(relation: &ConflictRelation, diagonals: usize) -> CheckResult {
    let mut rng = stream(0x5eed, 7);
    let mut passed = 0;
    let mut failed = 0;
    for _ in 0..diagonals {
        let diag: [QueueState; LANE_COUNT] =
            std::array::from_fn(|_| QueueState::new(rng.random_range(-1..=5)).expect("in range"));
        let order = ranking(&diag);
        let mut blocked = 0u16;
        for i in 0..LANE_COUNT {
            if diag[i].value() < 0 {
                blocked |= 1 << i;
                for j in 0..LANE_COUNT {
                    if j != i && relation.conflicts_idx(i, j) {
                        blocked |= 1 << j;
                    }
                }
            }
        }
        let mut memo = vec![0u16; 1 << LANE_COUNT];
        // The oracle depends only on the eligible set, which many masks share.
        let mut seen = vec![false; 1 << LANE_COUNT];
        for mask in 0u32..1 << LANE_COUNT {
            let mask = mask as u16;
            let eligible = mask & !blocked;
            if !seen[eligible as usize] {
                memo[eligible as usize] = exhaustive_open_set(relation, &order, eligible);
                seen[eligible as usize] = true;
            }
            let expected = memo[eligible as usize];
            let mut m = ConflictMatrix {
                relation: *relation,
                diagonal: diag,
            };
            let got = m
                .select_open_set(|l| mask >> l.index() & 1 == 1)
                .open
                .iter()
                .fold(0u16, |a, l| a | 1 << l.index());
            if got == expected {
                passed += 1;
            } else {
                failed += 1;
            }
        }
    }
    CheckResult {
        name: "scheduler-vs-exhaustive",
        passed,
        failed,
        note: format!("{diagonals} diagonals x 4096 masks"),
    }
}

fn fixture_check(fixture: &str) -> CheckResult {
    let builtin = default_conflict_relation();
    match ConflictRelation::parse_fixture(fixture) {
        Ok(parsed) => {
            let mut passed = 0;
            let mut failed = 0;
            for a in 0..LANE_COUNT {
                for b in 0..LANE_COUNT {
                    if a == b {
                        continue;
                    }
                    if parsed.conflicts_idx(a, b) == builtin.conflicts_idx(a, b) {
                        passed += 1;
                    } else {
                        failed += 1;
                    }
                }
            }
            CheckResult {
                name: "conflict-table-fixture",
                passed,
                failed,
                note: String::new(),
            }
        }
        Err(e) => CheckResult {
            name: "conflict-table-fixture",
            passed: 0,
            failed: 1,
            note: e.to_string(),
        },
    }
}

/// `a^x` as `a^floor(x) * exp(frac(x) * ln a)`, the integer power by squaring.
pub fn split_power(a: f64, x: f64) -> f64 {
    let whole = x.floor();
    let frac = x - whole;
    let mut base = a;
    let mut n = whole as u64;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc * (frac * a.ln()).exp()
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn formula_check(samples: usize) -> CheckResult {
    let mut rng = stream(0x5eed, 8);
    let mut passed = 0;
    let mut failed = 0;
    let defaults = DwellParams::<f64>::default();
    let mut tally = |ok: bool| if ok { passed += 1 } else { failed += 1 };

    tally(dwell_time(0.0, &defaults).ok() == Some(15.0));
    tally(dwell_time(1000.0, &defaults).is_ok_and(|y| (y - 0.5).abs() < 1e-6));
    tally(dwell_time(10.0, &defaults).is_ok_and(|y| (y - (0.5 + 14.5 * 0.348_678_440_1)).abs() < 1e-9));
    let o = QueueObservation::new(0.5, 100.0, 0.2, 100.0, false).expect("valid");
    tally(time_to_empty(&o, 10.0).ok() == Some(5.0));

    for _ in 0..samples {
        let a = rng.random_range(0.05..0.999);
        let y_min = rng.random_range(0.01..10.0);
        let y_max = y_min + rng.random_range(0.01..100.0);
        let x = rng.random_range(0.0..200.0);
        let p = DwellParams::new(a, y_min, y_max).expect("valid params");
        let want = y_min + (y_max - y_min) * split_power(a, x);
        tally(dwell_time(x, &p).is_ok_and(|y| rel_err(y, want) <= 1e-9));

        let (d_in, d_out) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        let (l_in, l_out) = (rng.random_range(1.0..500.0), rng.random_range(1.0..500.0));
        let v = rng.random_range(0.5..30.0);
        let o = QueueObservation::new(d_in, l_in, d_out, l_out, false).expect("valid");
        let free = l_out - d_out * l_out;
        let used = l_in * d_in;
        let want = if free < used { free / v } else { used / v };
        tally(time_to_empty(&o, v).is_ok_and(|t| rel_err(t, want.max(0.0)) <= 1e-9));
    }
    CheckResult {
        name: "formula-evaluations",
        passed,
        failed,
        note: format!("{samples} random inputs"),
    }
}

fn table_shape_check(relation: &ConflictRelation) -> CheckResult {
    let mut passed = 0;
    let mut failed = 0;
    let mut tally = |ok: bool| if ok { passed += 1 } else { failed += 1 };
    tally(relation.is_symmetric());
    tally(relation.pair_count() == 28);
    for road in 0..4 {
        let right = relation.row_mask(road * 3).count_ones();
        let forward = relation.row_mask(road * 3 + 1).count_ones();
        tally(right < forward);
    }
    for l in LaneId::ALL {
        tally(LaneId::from_index(l.index()) == Some(l));
    }
    CheckResult {
        name: "conflict-table-shape",
        passed,
        failed,
        note: String::new(),
    }
}

/// Runs every check; `conflict_fixture` is the table text to hold the built-in relation against.
pub fn run_all(conflict_fixture: &str) -> VerifyReport {
    let relation = default_conflict_relation();
    VerifyReport {
        checks: vec![
            fixture_check(conflict_fixture),
            table_shape_check(&relation),
            scheduler_check(&relation, 20),
            formula_check(10_000),
        ],
    }
}
