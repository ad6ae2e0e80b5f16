//! CSV renderings of run results. Column order is fixed.

use std::fmt::Write;

use crate::sim::{MetricsRecord, SimConfig};

pub const SUMMARY_HEADER: &str =
    "scenario,t_max,seed,awt_all,awt_cv,awt_ev,throughput,collisions,empty_green_grants,spillback";

pub const VEHICLE_LOG_HEADER: &str = "id,class,lane,arrival_step,departure_step,wait_s";

fn secs(v: f64) -> String {
    format!("{v:.6}")
}

/// `t_max` without a trailing `.0` for whole seconds.
fn t_max_str(t: f64) -> String {
    if t.fract() == 0.0 && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}

pub fn summary_row(cfg: &SimConfig, m: &MetricsRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        cfg.scenario,
        t_max_str(cfg.t_max),
        cfg.seed,
        secs(m.awt_all),
        secs(m.awt_cv),
        secs(m.awt_ev),
        m.throughput,
        m.collisions,
        m.empty_green_grants,
        m.spillback_rejections
    )
}

pub fn vehicle_log_csv(m: &MetricsRecord) -> String {
    let mut out = String::with_capacity(32 * (m.per_vehicle_log.len() + 1));
    out.push_str(VEHICLE_LOG_HEADER);
    out.push('\n');
    for r in &m.per_vehicle_log {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.id,
            r.class,
            r.lane,
            r.arrival_step,
            r.departure_step,
            r.wait()
        );
    }
    out
}

pub const COMPARE_HEADER: &str =
    "controller,scenario,t_max,seed,awt_all,awt_cv,awt_ev,throughput,max_wait,collisions,empty_green_grants";

pub fn compare_row(controller: &str, cfg: &SimConfig, m: &MetricsRecord) -> String {
    format!(
        "{controller},{},{},{},{},{},{},{},{},{},{}",
        cfg.scenario,
        t_max_str(cfg.t_max),
        cfg.seed,
        secs(m.awt_all),
        secs(m.awt_cv),
        secs(m.awt_ev),
        m.throughput,
        m.max_wait(),
        m.collisions,
        m.empty_green_grants
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_max_formatting() {
        assert_eq!(t_max_str(30.0), "30");
        assert_eq!(t_max_str(12.5), "12.5");
    }

    #[test]
    fn header_columns() {
        assert_eq!(SUMMARY_HEADER.split(',').count(), 10);
        assert_eq!(VEHICLE_LOG_HEADER.split(',').count(), 6);
    }
}
