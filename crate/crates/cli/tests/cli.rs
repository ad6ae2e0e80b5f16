use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use junction_core::sim::CONFIG_KEYS;
use junction_core::SimConfig;

fn junction(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_junction"))
        .args(args)
        .output()
        .expect("spawn junction")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

const SUMMARY_HEADER: &str =
    "scenario,t_max,seed,awt_all,awt_cv,awt_ev,throughput,collisions,empty_green_grants,spillback";

#[test]
fn run_prints_header_and_one_row() {
    let o = junction(&["run", "--steps", "600", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], SUMMARY_HEADER);
    assert!(lines[1].starts_with("s1,30,4,"), "{}", lines[1]);
    assert_eq!(lines[1].split(',').count(), 10);
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let a = junction(&["run", "--steps", "900", "--seed", "7", "--scenario", "s2"]);
    let b = junction(&["run", "--steps", "900", "--seed", "7", "--scenario", "s2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let path = tmp("bad_key.cfg");
    fs::write(&path, "lambda_cv = 0.5\nwarp_factor = 9\n").unwrap();
    let o = junction(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("warp_factor"), "{}", stderr(&o));

    let path = tmp("bad_value.cfg");
    fs::write(&path, "y_max = banana\n").unwrap();
    let o = junction(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("y_max"), "{}", stderr(&o));
}

#[test]
fn invalid_override_exits_2_and_names_the_key() {
    let o = junction(&["run", "--lambda-ev", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda_ev"), "{}", stderr(&o));

    let o = junction(&["run", "--scenario", "s9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let path = tmp("override.cfg");
    fs::write(&path, "# comment\nt_max = 45\nseed = 3\nsteps = 300\n").unwrap();
    let o = junction(&["run", "--config", path.to_str().unwrap(), "--seed", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("s1,45,8,"));
}

#[test]
fn every_config_key_has_a_flag() {
    let defaults = SimConfig::default().to_text();
    for key in CONFIG_KEYS {
        let value = defaults
            .lines()
            .find_map(|l| {
                let (k, v) = l.split_once('=')?;
                (k.trim() == key).then(|| v.trim().to_string())
            })
            .unwrap_or_else(|| panic!("{key} missing from to_text"));
        let flag = format!("--{}", key.replace('_', "-"));
        let mut args = vec!["run", "--steps", "20"];
        if key != "steps" {
            args.extend([flag.as_str(), value.as_str()]);
        }
        let o = junction(&args);
        assert!(o.status.success(), "{flag} {value}: {}", stderr(&o));
    }
}

#[test]
fn log_has_one_row_per_departure() {
    let log = tmp("vehicles.csv");
    let o = junction(&["run", "--steps", "600", "--log", log.to_str().unwrap()]);
    assert!(o.status.success());
    let summary = stdout(&o);
    let throughput: usize = summary
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(6)
        .unwrap()
        .parse()
        .unwrap();
    let text = fs::read_to_string(&log).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("id,class,lane,arrival_step,departure_step,wait_s"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), throughput);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        let arr: u64 = f[3].parse().unwrap();
        let dep: u64 = f[4].parse().unwrap();
        let wait: u64 = f[5].parse().unwrap();
        assert_eq!(dep - arr, wait);
        assert!(f[1] == "cv" || f[1] == "ev");
    }
}

#[test]
fn out_writes_the_same_bytes_as_stdout() {
    let out = tmp("summary.csv");
    let a = junction(&["run", "--steps", "300", "--out", out.to_str().unwrap()]);
    assert!(a.status.success());
    assert!(a.stdout.is_empty());
    let b = junction(&["run", "--steps", "300"]);
    assert_eq!(fs::read(&out).unwrap(), b.stdout);
}

#[test]
fn rules_script_is_applied_and_validated() {
    let rules = tmp("rules.txt");
    fs::write(
        &rules,
        "# close the west-east forward pair\n100 WF EF conflict\n400 WF EF clear\n",
    )
    .unwrap();
    let o = junction(&["run", "--steps", "600", "--rules", rules.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let f: Vec<&str> = row.split(',').collect();
    assert_eq!(f[7], "0", "collisions after a rule change: {row}");

    fs::write(&rules, "100 WF WF conflict\n").unwrap();
    let o = junction(&["run", "--rules", rules.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&rules, "100 WF QQ conflict\n").unwrap();
    let o = junction(&["run", "--rules", rules.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_single_point_gives_one_row_per_scenario() {
    let o = junction(&["sweep", "--steps", "300", "--t-max", "30", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], SUMMARY_HEADER);
    assert!(lines[1].starts_with("s1,30,1,"));
    assert!(lines[2].starts_with("s2,30,1,"));
}

#[test]
fn sweep_default_grid_size() {
    let o = junction(&["sweep", "--steps", "30", "--seeds", "1,2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 16 * 2 * 2);
}

#[test]
fn sweep_parallel_matches_serial_bytes() {
    let args = [
        "sweep",
        "--steps",
        "400",
        "--seeds",
        "3,1,2",
        "--t-max-values",
        "90,15,40",
    ];
    let par = junction(&args);
    let mut serial_args = args.to_vec();
    serial_args.push("--serial");
    let ser = junction(&serial_args);
    assert!(par.status.success() && ser.status.success());
    assert_eq!(par.stdout, ser.stdout);
    let text = stdout(&par);
    let keys: Vec<(String, u32, u64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 2 * 3 * 3);
}

#[test]
fn sweep_row_equals_run_row() {
    let sweep = junction(&["sweep", "--steps", "500", "--seeds", "5", "--t-max-values", "20,35"]);
    let run = junction(&[
        "run",
        "--steps",
        "500",
        "--seed",
        "5",
        "--t-max",
        "35",
        "--scenario",
        "s2",
    ]);
    let row = stdout(&run).lines().nth(1).unwrap().to_string();
    assert!(stdout(&sweep).lines().any(|l| l == row), "{row}");
}

#[test]
fn sweep_series_has_six_series() {
    let series = tmp("series.csv");
    let o = junction(&[
        "sweep",
        "--steps",
        "200",
        "--seeds",
        "1,2,3",
        "--t-max-values",
        "15,30",
        "--series",
        series.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&series).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("vehicle_class,scenario,t_max,median_awt"));
    let mut names: Vec<(String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    assert_eq!(names.len(), 3 * 2 * 2);
    names.sort();
    names.dedup();
    assert_eq!(names.len(), 6);
}

#[test]
fn compare_with_no_traffic_reports_zeros() {
    let o = junction(&[
        "compare",
        "--lambda-cv",
        "0",
        "--lambda-ev",
        "0",
        "--steps",
        "300",
        "--seeds",
        "1,2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3 * 2);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(&f[4..8], ["0.000000", "0.000000", "0.000000", "0"], "{r}");
    }
}

#[test]
fn compare_baseline_restricts_controllers() {
    let o = junction(&["compare", "--steps", "300", "--baseline", "greedy"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let names: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["adaptive", "greedy"]);

    let o = junction(&["compare", "--baseline", "roundabout"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_with_baseline() {
    let o = junction(&["run", "--steps", "300", "--baseline", "fixed"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn verify_passes_on_builtin_and_fails_on_corrupt_fixture() {
    let o = junction(&["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| !l.starts_with("FAIL")));

    let good = junction_core::verify::CONFLICT_FIXTURE;
    let mut rows: Vec<String> = good
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with("//") && !l.starts_with(';'))
        .map(String::from)
        .collect();
    let flip = |c: char| if c == '.' { 'X' } else { '.' };
    // Flip WR/NR symmetrically.
    let mut r0: Vec<char> = rows[0].chars().collect();
    r0[6] = flip(r0[6]);
    rows[0] = r0.into_iter().collect();
    let mut r6: Vec<char> = rows[6].chars().collect();
    r6[0] = flip(r6[0]);
    rows[6] = r6.into_iter().collect();
    let path = tmp("corrupt_conflicts.txt");
    fs::write(&path, rows.join("\n") + "\n").unwrap();
    let o = junction(&["verify", "--conflict-fixture", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}
