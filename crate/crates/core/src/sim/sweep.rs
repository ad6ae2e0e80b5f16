//! Grid of (scenario, t_max, seed) runs.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::scheduler::RuleChange;
use crate::sim::{run_with, ControllerKind, MetricsRecord, Scenario, SimConfig};

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base_config: SimConfig,
    pub scenarios: Vec<Scenario>,
    pub t_max_values: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    /// Both scenarios, t_max 15..=90 step 5, seeds 1..=10.
    pub fn new(base_config: SimConfig) -> Self {
        SweepSpec {
            base_config,
            scenarios: vec![Scenario::S1Priority, Scenario::S2NoPriority],
            t_max_values: (3..=18).map(|k| f64::from(k * 5)).collect(),
            seeds: (1..=10).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() || self.t_max_values.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("sweep: empty scenario, t_max or seed list".into()));
        }
        for &t in &self.t_max_values {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("t_max: must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Configs in output order: scenario, then t_max, then seed.
    pub fn cells(&self) -> Vec<SimConfig> {
        let mut out = Vec::with_capacity(self.scenarios.len() * self.t_max_values.len() * self.seeds.len());
        let mut scenarios = self.scenarios.clone();
        scenarios.sort();
        scenarios.dedup();
        let mut ts = self.t_max_values.clone();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        for &sc in &scenarios {
            for &t in &ts {
                for &seed in &seeds {
                    let mut c = self.base_config.clone();
                    c.scenario = sc;
                    c.t_max = t;
                    c.seed = seed;
                    out.push(c);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub config: SimConfig,
    pub metrics: MetricsRecord,
}

pub fn run_cell(config: SimConfig, rules: &[RuleChange]) -> Result<SweepCell> {
    let metrics = run_with(&config, ControllerKind::Adaptive, rules)?;
    Ok(SweepCell { config, metrics })
}

pub fn sort_cells(cells: &mut [SweepCell]) {
    cells.sort_by(|a, b| {
        a.config
            .scenario
            .cmp(&b.config.scenario)
            .then(a.config.t_max.total_cmp(&b.config.t_max))
            .then(a.config.seed.cmp(&b.config.seed))
    });
}

pub fn run_serial(spec: &SweepSpec, rules: &[RuleChange]) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    let mut cells = spec
        .cells()
        .into_iter()
        .map(|c| run_cell(c, rules))
        .collect::<Result<Vec<_>>>()?;
    sort_cells(&mut cells);
    Ok(cells)
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Median waits per (class, scenario, t_max); `cells` must be sorted.
pub fn series_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("vehicle_class,scenario,t_max,median_awt\n");
    type Pick = fn(&MetricsRecord) -> f64;
    let classes: [(&str, Pick); 3] = [("ev", |m| m.awt_ev), ("cv", |m| m.awt_cv), ("all", |m| m.awt_all)];
    for (name, get) in classes {
        for group in cells.chunk_by(|a, b| a.config.scenario == b.config.scenario && a.config.t_max == b.config.t_max) {
            let mut v: Vec<f64> = group.iter().map(|c| get(&c.metrics)).collect();
            let c = &group[0].config;
            let _ = writeln!(out, "{name},{},{},{:.6}", c.scenario, c.t_max, median(&mut v));
        }
    }
    out
}
