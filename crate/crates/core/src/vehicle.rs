use std::fmt;

use crate::error::{Error, Result};
use crate::lane::LaneId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VehicleClass {
    Classic,
    Emergency,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::Classic => "cv",
            VehicleClass::Emergency => "ev",
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: u64,
    pub class: VehicleClass,
    pub lane: LaneId,
    /// Footprint including the headway gap, metres.
    pub length_m: f64,
    pub arrival_step: u64,
    pub departure_step: Option<u64>,
}

impl Vehicle {
    pub fn new(id: u64, class: VehicleClass, lane: LaneId, length_m: f64, arrival_step: u64) -> Self {
        debug_assert!(length_m > 0.0);
        Vehicle {
            id,
            class,
            lane,
            length_m,
            arrival_step,
            departure_step: None,
        }
    }

    pub fn depart(&mut self, step: u64) -> Result<()> {
        if step < self.arrival_step {
            return Err(Error::InvariantViolation(format!(
                "vehicle {} departs at {step} before arriving at {}",
                self.id, self.arrival_step
            )));
        }
        self.departure_step = Some(step);
        Ok(())
    }
}

/// Seconds between joining the entry queue and crossing the stop line.
pub fn waiting_time(v: &Vehicle) -> Result<u64> {
    v.departure_step
        .map(|d| d - v.arrival_step)
        .ok_or(Error::NotDeparted(v.id))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn car(arrival: u64) -> Vehicle {
        Vehicle::new(7, VehicleClass::Classic, LaneId::ALL[0], 5.0, arrival)
    }

    #[test]
    fn wait_is_departure_minus_arrival() {
        let mut v = car(10);
        v.depart(25).unwrap();
        assert_eq!(waiting_time(&v), Ok(15));
        let mut w = car(4);
        w.depart(4).unwrap();
        assert_eq!(waiting_time(&w), Ok(0));
    }

    #[test]
    fn undeparted() {
        assert_eq!(waiting_time(&car(3)), Err(Error::NotDeparted(7)));
    }

    #[test]
    fn departure_before_arrival_rejected() {
        assert!(car(10).depart(9).is_err());
    }
}
