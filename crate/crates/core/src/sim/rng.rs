//! Arrival randomness.
//!
//! Every stream is ChaCha8 keyed by the run seed (expanded with
//! `seed_from_u64`) and selected with `set_stream`:
//!
//! | stream | purpose                       |
//! |--------|-------------------------------|
//! | 1      | classic arrival counts        |
//! | 2      | emergency arrival counts      |
//! | 3      | lane choice of each arrival   |
//!
//! Counts are `Poisson(lambda)` per second. Lanes are drawn per vehicle from the
//! lane weights, classic vehicles first, then emergency ones. None of the
//! streams depend on controller decisions, so two controllers run with the
//! same seed see identical arrivals.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::lane::{LaneId, LANE_COUNT};
use crate::vehicle::VehicleClass;

pub const STREAM_CV: u64 = 1;
pub const STREAM_EV: u64 = 2;
pub const STREAM_LANE: u64 = 3;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

struct Counter {
    rng: ChaCha8Rng,
    dist: Option<Poisson<f64>>,
}

impl Counter {
    fn new(seed: u64, id: u64, lambda: f64) -> Result<Self> {
        let dist = if lambda > 0.0 {
            Some(Poisson::new(lambda).map_err(|e| Error::Config(format!("arrival rate {lambda}: {e}")))?)
        } else {
            None
        };
        Ok(Counter {
            rng: stream(seed, id),
            dist,
        })
    }

    fn draw(&mut self) -> usize {
        match &self.dist {
            Some(d) => d.sample(&mut self.rng) as usize,
            None => 0,
        }
    }
}

pub struct ArrivalStreams {
    cv: Counter,
    ev: Counter,
    lane_rng: ChaCha8Rng,
    lanes: WeightedIndex<f64>,
}

impl ArrivalStreams {
    pub fn new(seed: u64, lambda_cv: f64, lambda_ev: f64, weights: &[f64; LANE_COUNT]) -> Result<Self> {
        Ok(ArrivalStreams {
            cv: Counter::new(seed, STREAM_CV, lambda_cv)?,
            ev: Counter::new(seed, STREAM_EV, lambda_ev)?,
            lane_rng: stream(seed, STREAM_LANE),
            lanes: WeightedIndex::new(weights.iter().copied())
                .map_err(|e| Error::Config(format!("lane_weights: {e}")))?,
        })
    }

    /// Arrivals for one second, in the order they join their queues.
    pub fn next_second(&mut self) -> Vec<(VehicleClass, LaneId)> {
        let n_cv = self.cv.draw();
        let n_ev = self.ev.draw();
        let mut out = Vec::with_capacity(n_cv + n_ev);
        for class in
            std::iter::repeat_n(VehicleClass::Classic, n_cv).chain(std::iter::repeat_n(VehicleClass::Emergency, n_ev))
        {
            let lane = LaneId::ALL[self.lanes.sample(&mut self.lane_rng)];
            out.push((class, lane));
        }
        out
    }
}

/// Uniform `u64` from a dedicated stream, used by tests that need seeds.
pub fn seed_sequence(master: u64, n: usize) -> Vec<u64> {
    let mut rng = stream(master, 0);
    (0..n).map(|_| rng.random()).collect()
}
