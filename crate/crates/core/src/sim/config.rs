use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lane::LANE_COUNT;
use crate::queue::DwellParams;

/// Evaluation scenario: with (S1) or without (S2) emergency priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    S1Priority,
    S2NoPriority,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::S1Priority => "s1",
            Scenario::S2NoPriority => "s2",
        }
    }

    pub fn emergency_priority(self) -> bool {
        self == Scenario::S1Priority
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" | "s1_priority" => Ok(Scenario::S1Priority),
            "s2" | "s2_no_priority" => Ok(Scenario::S2NoPriority),
            other => Err(Error::Config(format!("scenario: expected s1 or s2, got `{other}`"))),
        }
    }
}

/// Run parameters. One simulation step is one second.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Classic arrivals per second, whole intersection.
    pub lambda_cv: f64,
    /// Emergency arrivals per second, whole intersection.
    pub lambda_ev: f64,
    pub steps: u64,
    /// Cap on a single green allocation, seconds.
    pub t_max: f64,
    pub scenario: Scenario,
    /// Crossing speed, m/s.
    pub v_cross: f64,
    pub lane_length_m: f64,
    pub exit_length_m: f64,
    /// Space freed on each exit per second; `None` follows `v_cross`.
    pub exit_drain_rate: Option<f64>,
    pub vehicle_length_m: f64,
    pub dwell: DwellParams<f64>,
    pub seed: u64,
    pub metrics_first_n: usize,
    /// All-red seconds after a lane's green before a conflicting lane may open.
    pub clearance_s: u64,
    /// Relative arrival weight per lane, lane-index order.
    pub lane_weights: [f64; LANE_COUNT],
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            lambda_cv: 0.8,
            lambda_ev: 0.025,
            steps: 3600,
            t_max: 30.0,
            scenario: Scenario::S1Priority,
            v_cross: 10.0,
            lane_length_m: 100.0,
            exit_length_m: 100.0,
            exit_drain_rate: None,
            vehicle_length_m: 5.0,
            dwell: DwellParams::default(),
            seed: 1,
            metrics_first_n: 3000,
            clearance_s: 0,
            lane_weights: [1.0; LANE_COUNT],
        }
    }
}

/// Keys accepted by [`SimConfig::set`], in documentation order.
pub const CONFIG_KEYS: [&str; 17] = [
    "lambda_cv",
    "lambda_ev",
    "steps",
    "t_max",
    "scenario",
    "v_cross",
    "lane_length_m",
    "exit_length_m",
    "exit_drain_rate",
    "vehicle_length_m",
    "dwell_a",
    "y_min",
    "y_max",
    "seed",
    "metrics_first_n",
    "clearance_s",
    "lane_weights",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{}`", value.trim())))
}

impl SimConfig {
    pub fn exit_drain_rate(&self) -> f64 {
        self.exit_drain_rate.unwrap_or(self.v_cross)
    }

    /// Vehicles per second an active lane can discharge.
    pub fn discharge_rate(&self) -> f64 {
        self.v_cross / self.vehicle_length_m
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "lambda_cv" => self.lambda_cv = num(key, value)?,
            "lambda_ev" => self.lambda_ev = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "t_max" => self.t_max = num(key, value)?,
            "scenario" => {
                self.scenario = value
                    .parse()
                    .map_err(|_| Error::Config(format!("scenario: expected s1 or s2, got `{}`", value.trim())))?
            }
            "v_cross" => self.v_cross = num(key, value)?,
            "lane_length_m" => self.lane_length_m = num(key, value)?,
            "exit_length_m" => self.exit_length_m = num(key, value)?,
            "exit_drain_rate" => self.exit_drain_rate = Some(num(key, value)?),
            "vehicle_length_m" => self.vehicle_length_m = num(key, value)?,
            "dwell_a" => self.dwell.a = num(key, value)?,
            "y_min" => self.dwell.y_min = num(key, value)?,
            "y_max" => self.dwell.y_max = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "metrics_first_n" => self.metrics_first_n = num(key, value)?,
            "clearance_s" => self.clearance_s = num(key, value)?,
            "lane_weights" => {
                let ws: Vec<f64> = value
                    .split(',')
                    .map(|w| num("lane_weights", w))
                    .collect::<Result<_>>()?;
                self.lane_weights = ws.try_into().map_err(|v: Vec<f64>| {
                    Error::Config(format!("lane_weights: expected {LANE_COUNT} values, got {}", v.len()))
                })?;
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("lambda_cv", self.lambda_cv.to_string());
        kv("lambda_ev", self.lambda_ev.to_string());
        kv("steps", self.steps.to_string());
        kv("t_max", self.t_max.to_string());
        kv("scenario", self.scenario.to_string());
        kv("v_cross", self.v_cross.to_string());
        kv("lane_length_m", self.lane_length_m.to_string());
        kv("exit_length_m", self.exit_length_m.to_string());
        kv("exit_drain_rate", self.exit_drain_rate().to_string());
        kv("vehicle_length_m", self.vehicle_length_m.to_string());
        kv("dwell_a", self.dwell.a.to_string());
        kv("y_min", self.dwell.y_min.to_string());
        kv("y_max", self.dwell.y_max.to_string());
        kv("seed", self.seed.to_string());
        kv("metrics_first_n", self.metrics_first_n.to_string());
        kv("clearance_s", self.clearance_s.to_string());
        kv(
            "lane_weights",
            self.lane_weights
                .iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        s
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |k: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{k} must be a finite non-negative number, got {v}"
                )))
            }
        };
        let pos = |k: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{k} must be positive, got {v}")))
            }
        };
        nonneg("lambda_cv", self.lambda_cv)?;
        nonneg("lambda_ev", self.lambda_ev)?;
        pos("t_max", self.t_max)?;
        pos("v_cross", self.v_cross)?;
        pos("lane_length_m", self.lane_length_m)?;
        pos("exit_length_m", self.exit_length_m)?;
        pos("exit_drain_rate", self.exit_drain_rate())?;
        pos("vehicle_length_m", self.vehicle_length_m)?;
        if self.vehicle_length_m > self.lane_length_m.min(self.exit_length_m) {
            return Err(Error::Config("vehicle_length_m exceeds a queue length".into()));
        }
        DwellParams::new(self.dwell.a, self.dwell.y_min, self.dwell.y_max)
            .map_err(|e| Error::Config(format!("dwell_a/y_min/y_max: {e}")))?;
        for w in self.lane_weights {
            nonneg("lane_weights", w)?;
        }
        if self.lane_weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("lane_weights must not all be zero".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SimConfig::default();
        assert_eq!((c.lambda_cv, c.lambda_ev, c.steps), (0.8, 0.025, 3600));
        assert_eq!(c.metrics_first_n, 3000);
        assert_eq!(c.exit_drain_rate(), 10.0);
        assert_eq!(c.discharge_rate(), 2.0);
        c.validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let mut c = SimConfig {
            t_max: 45.0,
            scenario: Scenario::S2NoPriority,
            ..SimConfig::default()
        };
        c.lane_weights[3] = 2.5;
        let back = SimConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back.t_max, 45.0);
        assert_eq!(back.scenario, Scenario::S2NoPriority);
        assert_eq!(back.lane_weights[3], 2.5);
        assert_eq!(back.to_text(), c.to_text());
    }

    #[test]
    fn errors_name_the_key() {
        let e = SimConfig::from_text("t_max = abc").unwrap_err().to_string();
        assert!(e.contains("t_max"), "{e}");
        let e = SimConfig::from_text("bogus = 3").unwrap_err().to_string();
        assert!(e.contains("bogus"), "{e}");
        let e = SimConfig::from_text("v_cross = 0").unwrap_err().to_string();
        assert!(e.contains("v_cross"), "{e}");
        let e = SimConfig::from_text("lane_weights = 1,2").unwrap_err().to_string();
        assert!(e.contains("lane_weights"), "{e}");
        let e = SimConfig::from_text("dwell_a = 1.5").unwrap_err().to_string();
        assert!(e.contains("dwell_a"), "{e}");
        assert!(SimConfig::from_text("no equals sign").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = SimConfig::from_text("# header\n\nseed = 9 # trailing\nscenario = S2\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.scenario, Scenario::S2NoPriority);
    }
}
