//! `junction` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use junction_core::scheduler::{parse_rule_script, RuleChange};
use junction_core::sim::sweep::{self, SweepSpec};
use junction_core::{report, verify, ControllerKind, SimConfig};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "junction", version, about = "Queue-state signal control simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print its summary row.
    #[command(allow_negative_numbers = true)]
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write the per-vehicle log (CSV) here.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Controller to run instead of the queue-state one.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Sweep t_max over scenarios and seeds.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated seeds (default 1..=10).
        #[arg(long)]
        seeds: Option<String>,
        /// Comma-separated t_max values (default 15,20,...,90).
        #[arg(long)]
        t_max_values: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write median waits per (class, scenario, t_max) here.
        #[arg(long)]
        series: Option<PathBuf>,
        /// Run cells one after another instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Run the queue-state controller and the baselines on identical arrivals.
    #[command(allow_negative_numbers = true)]
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seeds: Option<String>,
        /// Only compare against this baseline (fixed or greedy).
        #[arg(long)]
        baseline: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in oracle checks.
    Verify {
        /// Conflict table fixture to check (default: the built-in copy).
        #[arg(long)]
        conflict_fixture: Option<PathBuf>,
    },
}

/// Every config key, as a flag of the same name.
#[derive(Args, Debug, Default, Clone)]
struct ConfigArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rule-change script: `<step> <laneA> <laneB> <conflict|clear>` per line.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    lambda_cv: Option<String>,
    #[arg(long)]
    lambda_ev: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    v_cross: Option<String>,
    #[arg(long)]
    lane_length_m: Option<String>,
    #[arg(long)]
    exit_length_m: Option<String>,
    #[arg(long)]
    exit_drain_rate: Option<String>,
    #[arg(long)]
    vehicle_length_m: Option<String>,
    #[arg(long)]
    dwell_a: Option<String>,
    #[arg(long)]
    y_min: Option<String>,
    #[arg(long)]
    y_max: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    metrics_first_n: Option<String>,
    #[arg(long)]
    clearance_s: Option<String>,
    #[arg(long)]
    lane_weights: Option<String>,
    /// Raw override, repeatable: `--set key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn config(msg: impl ToString) -> Self {
        Failure {
            code: 2,
            msg: msg.to_string(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: 1,
            msg: format!("{}: {e}", path.display()),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

impl ConfigArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let pairs: [(&'static str, &Option<String>); 17] = [
            ("lambda_cv", &self.lambda_cv),
            ("lambda_ev", &self.lambda_ev),
            ("steps", &self.steps),
            ("t_max", &self.t_max),
            ("scenario", &self.scenario),
            ("v_cross", &self.v_cross),
            ("lane_length_m", &self.lane_length_m),
            ("exit_length_m", &self.exit_length_m),
            ("exit_drain_rate", &self.exit_drain_rate),
            ("vehicle_length_m", &self.vehicle_length_m),
            ("dwell_a", &self.dwell_a),
            ("y_min", &self.y_min),
            ("y_max", &self.y_max),
            ("seed", &self.seed),
            ("metrics_first_n", &self.metrics_first_n),
            ("clearance_s", &self.clearance_s),
            ("lane_weights", &self.lane_weights),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
            .collect()
    }

    fn build(&self) -> Result<SimConfig, Failure> {
        let mut cfg = SimConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            cfg.apply_text(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        }
        for raw in &self.set {
            let (k, v) = raw
                .split_once('=')
                .ok_or_else(|| Failure::config(format!("--set expects KEY=VALUE, got `{raw}`")))?;
            cfg.set(k.trim(), v).map_err(Failure::config)?;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, v).map_err(Failure::config)?;
        }
        cfg.validate().map_err(Failure::config)?;
        Ok(cfg)
    }

    fn rules(&self) -> Result<Vec<RuleChange>, Failure> {
        match &self.rules {
            None => Ok(Vec::new()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
                parse_rule_script(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
            }
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, raw: &str) -> Result<Vec<T>, Failure> {
    let items: Vec<T> = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Failure::config(format!("{flag}: cannot parse `{}`", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(Failure::config(format!("{flag}: empty list")));
    }
    Ok(items)
}

fn controller(raw: Option<&String>) -> Result<Option<ControllerKind>, Failure> {
    raw.map(|b| b.parse::<ControllerKind>().map_err(Failure::config))
        .transpose()
}

fn cmd_run(args: &ConfigArgs, log: Option<&Path>, out: Option<&Path>, baseline: Option<&String>) -> CmdResult {
    let cfg = args.build()?;
    let rules = args.rules()?;
    let kind = controller(baseline)?.unwrap_or(ControllerKind::Adaptive);
    let m = junction_core::run_with(&cfg, kind, &rules).map_err(|e| Failure {
        code: 1,
        msg: e.to_string(),
    })?;
    if let Some(path) = log {
        fs::write(path, report::vehicle_log_csv(&m)).map_err(|e| Failure::io(path, e))?;
    }
    emit(
        out,
        &format!("{}\n{}\n", report::SUMMARY_HEADER, report::summary_row(&cfg, &m)),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_parallel(spec: &SweepSpec, rules: &[RuleChange]) -> junction_core::Result<Vec<sweep::SweepCell>> {
    let mut cells = spec
        .cells()
        .into_par_iter()
        .map(|c| sweep::run_cell(c, rules))
        .collect::<junction_core::Result<Vec<_>>>()?;
    sweep::sort_cells(&mut cells);
    Ok(cells)
}

fn cmd_sweep(
    args: &ConfigArgs,
    seeds: Option<&String>,
    t_values: Option<&String>,
    out: Option<&Path>,
    series: Option<&Path>,
    serial: bool,
) -> CmdResult {
    let base = args.build()?;
    let rules = args.rules()?;
    let mut spec = SweepSpec::new(base);
    if let Some(raw) = seeds {
        spec.seeds = parse_list("--seeds", raw)?;
    } else if args.seed.is_some() {
        spec.seeds = vec![spec.base_config.seed];
    }
    if let Some(raw) = t_values {
        spec.t_max_values = parse_list("--t-max-values", raw)?;
    } else if args.t_max.is_some() {
        spec.t_max_values = vec![spec.base_config.t_max];
    }
    if args.scenario.is_some() {
        spec.scenarios = vec![spec.base_config.scenario];
    }
    spec.validate().map_err(Failure::config)?;
    let cells = if serial {
        sweep::run_serial(&spec, &rules)
    } else {
        run_parallel(&spec, &rules)
    }
    .map_err(|e| Failure {
        code: 1,
        msg: e.to_string(),
    })?;
    let mut text = String::from(report::SUMMARY_HEADER);
    text.push('\n');
    for c in &cells {
        text.push_str(&report::summary_row(&c.config, &c.metrics));
        text.push('\n');
    }
    emit(out, &text)?;
    if let Some(path) = series {
        fs::write(path, sweep::series_csv(&cells)).map_err(|e| Failure::io(path, e))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: &ConfigArgs, seeds: Option<&String>, baseline: Option<&String>, out: Option<&Path>) -> CmdResult {
    let base = args.build()?;
    let rules = args.rules()?;
    let seeds: Vec<u64> = match seeds {
        Some(raw) => parse_list("--seeds", raw)?,
        None => vec![base.seed],
    };
    let kinds = match controller(baseline)? {
        Some(ControllerKind::Adaptive) | None => vec![
            ControllerKind::Adaptive,
            ControllerKind::FixedCycle,
            ControllerKind::GreedyLongest,
        ],
        Some(b) => vec![ControllerKind::Adaptive, b],
    };
    let jobs: Vec<(ControllerKind, u64)> = kinds.iter().flat_map(|&k| seeds.iter().map(move |&s| (k, s))).collect();
    let rows: Vec<String> = jobs
        .par_iter()
        .map(|&(k, seed)| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            junction_core::run_with(&cfg, k, &rules).map(|m| report::compare_row(k.as_str(), &cfg, &m))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| Failure {
            code: 1,
            msg: e.to_string(),
        })?;
    let mut text = String::from(report::COMPARE_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r);
        text.push('\n');
    }
    emit(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(fixture: Option<&Path>) -> CmdResult {
    let text = match fixture {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::io(path, e))?,
        None => verify::CONFLICT_FIXTURE.to_string(),
    };
    let report = verify::run_all(&text);
    println!("{report}");
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Command::Run {
            cfg,
            log,
            out,
            baseline,
        } => cmd_run(cfg, log.as_deref(), out.as_deref(), baseline.as_ref()),
        Command::Sweep {
            cfg,
            seeds,
            t_max_values,
            out,
            series,
            serial,
        } => cmd_sweep(
            cfg,
            seeds.as_ref(),
            t_max_values.as_ref(),
            out.as_deref(),
            series.as_deref(),
            *serial,
        ),
        Command::Compare {
            cfg,
            seeds,
            baseline,
            out,
        } => cmd_compare(cfg, seeds.as_ref(), baseline.as_ref(), out.as_deref()),
        Command::Verify { conflict_fixture } => cmd_verify(conflict_fixture.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
